#include "output.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <openssl/evp.h>
#include <openssl/opensslv.h>
#include <unistd.h>

#include "CLI11.hpp"
#include "autores/error.hpp"

#ifndef AUTORES_VERSION
#define AUTORES_VERSION "unknown"
#endif

namespace autores::cli {

std::string sha256_hex(const std::string& data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xF]);
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.parent_path() / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("cannot rename into " + path.string() + ": " + ec.message());
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

nlohmann::ordered_json cell_json(const std::string& s) {
    if (s.empty()) return nullptr;
    long long i = 0;
    auto [ie, iec] = std::from_chars(s.data(), s.data() + s.size(), i);
    if (iec == std::errc{} && ie == s.data() + s.size()) return i;
    double d = 0.0;
    auto [de, dec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (dec == std::errc{} && de == s.data() + s.size() && std::isfinite(d)) return d;
    return s;
}

void flatten(const std::string& prefix, const nlohmann::ordered_json& v, std::vector<std::string>& head,
             std::vector<std::string>& row) {
    if (v.is_object()) {
        for (const auto& [k, inner] : v.items()) flatten(prefix.empty() ? k : prefix + "." + k, inner, head, row);
        return;
    }
    head.push_back(prefix);
    if (v.is_array()) {
        std::string joined;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) joined.push_back(';');
            joined += v[i].is_string() ? v[i].get<std::string>() : v[i].dump();
        }
        row.push_back(joined);
    } else if (v.is_string()) {
        row.push_back(v.get<std::string>());
    } else if (v.is_null()) {
        row.emplace_back();
    } else {
        row.push_back(v.dump());
    }
}

}  // namespace

nlohmann::ordered_json csv_to_json(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    if (!std::getline(in, line)) return rows;
    const auto header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        nlohmann::ordered_json row;
        for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = i < cells.size() ? cell_json(cells[i]) : nullptr;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string object_to_csv(const nlohmann::ordered_json& obj) {
    std::vector<std::string> head, row;
    flatten("", obj, head, row);
    std::string out;
    for (std::size_t i = 0; i < head.size(); ++i) out += (i ? "," : "") + head[i];
    out += "\n";
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += "\n";
    return out;
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (!std::filesystem::is_directory(dir_)) throw std::runtime_error("cannot create output directory " + dir_.string());
}

void OutputSet::write(const std::string& name, const std::string& content) {
    write_atomic(dir_ / name, content);
    files_.push_back({name, sha256_hex(content), content.size()});
}

void OutputSet::write_manifest(const nlohmann::ordered_json& config, const std::string& config_hash) {
    nlohmann::ordered_json m;
    m["tool"] = "autores";
    m["versions"] = {
        {"autores", AUTORES_VERSION},
        {"cli11", CLI11_VERSION},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"openssl", OPENSSL_VERSION_TEXT},
        {"compiler", __VERSION__},
    };
    m["config_sha256"] = config_hash;
    m["config"] = config;
    nlohmann::ordered_json outs = nlohmann::ordered_json::array();
    for (const auto& f : files_) outs.push_back({{"file", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    m["outputs"] = outs;
    write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
}

}  // namespace autores::cli
