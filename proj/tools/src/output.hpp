#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace autores::cli {

std::string sha256_hex(const std::string& data);

// Writes `content` to a temporary file next to `path`, then renames it over.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// CSV text (header line first) as an array of row objects; cells that parse
// as numbers become numbers, "nan"/"inf" stay strings.
nlohmann::ordered_json csv_to_json(const std::string& csv);

// Flat object as a header line and one row; arrays are ';'-joined and
// nested objects flattened with '.'.
std::string object_to_csv(const nlohmann::ordered_json& obj);

struct OutputFile {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
};

// Files of one run, written atomically into `dir` (created if missing).
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);

    void write(const std::string& name, const std::string& content);
    const std::vector<OutputFile>& files() const { return files_; }
    const std::filesystem::path& dir() const { return dir_; }

    // manifest.json: tool and library versions, the resolved config and its
    // hash, and the checksum of every file written so far.
    void write_manifest(const nlohmann::ordered_json& config, const std::string& config_hash);

private:
    std::filesystem::path dir_;
    std::vector<OutputFile> files_;
};

}  // namespace autores::cli
