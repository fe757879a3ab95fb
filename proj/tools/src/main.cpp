#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "autores/format.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

#ifndef AUTORES_VERSION
#define AUTORES_VERSION "unknown"
#endif

namespace cli = autores::cli;

namespace {

std::string type_label(cli::ValueType t) {
    switch (t) {
        case cli::ValueType::Number: return "NUM";
        case cli::ValueType::Auto: return "NUM|auto";
        case cli::ValueType::Integer: return "INT";
        case cli::ValueType::Bool: return "BOOL";
        case cli::ValueType::Choice: return "CHOICE";
        case cli::ValueType::Range: return "LO:HI:STEP";
        case cli::ValueType::NumberList: return "NUM,...";
        case cli::ValueType::Text: return "TEXT";
    }
    return "VALUE";
}

struct SubcommandSlots {
    CLI::App* app = nullptr;
    std::string config;
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> options;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"autores: autoresonance phase model, asymptotic series, stability and averaging tools"};
    app.set_version_flag("--version", AUTORES_VERSION);
    app.require_subcommand(1);

    std::map<cli::Subcommand, SubcommandSlots> slots;
    for (auto s : cli::all_subcommands()) {
        auto& slot = slots[s];
        slot.app = app.add_subcommand(std::string(cli::to_string(s)), std::string(cli::describe(s)));
        slot.app->add_option("--config", slot.config, "JSON config file; flags override its fields")
            ->type_name("PATH");
        for (const auto& spec : cli::option_specs(s)) {
            std::string help = spec.help;
            if (!spec.choices.empty()) help += " {" + autores::join(spec.choices, '|') + "}";
            help += "  [json: " + spec.key + "]";
            auto* opt = slot.app->add_option(spec.flag(), slot.raw[spec.key], help);
            opt->type_name(type_label(spec.type));
            opt->default_str(spec.default_text.empty() ? "none" : spec.default_text);
            slot.options[spec.key] = opt;
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    for (auto& [s, slot] : slots) {
        if (!slot.app->parsed()) continue;
        std::map<std::string, std::string> flags;
        for (const auto& [key, opt] : slot.options)
            if (opt->count() > 0) flags[key] = slot.raw[key];
        std::optional<std::string> env_out;
        if (const char* e = std::getenv("AUTORES_OUT")) env_out = e;

        cli::RunConfig cfg;
        try {
            cfg = cli::resolve(s, flags, slot.config, env_out);
        } catch (const cli::ConfigError& e) {
            std::cerr << "autores: config error: " << e.what() << '\n';
            return 2;
        }

        const std::string name(cli::to_string(s));
        try {
            cli::OutputSet out(cfg.out_dir());
            cli::run(cfg, out);
            const auto config_json = cfg.to_json(true);
            out.write_manifest(cfg.to_json(false), cli::sha256_hex(config_json.dump()));
            for (const auto& f : out.files())
                std::cerr << "autores " << name << ": wrote " << (out.dir() / f.name).string() << " (" << f.bytes
                          << " bytes)\n";
            std::cerr << "autores " << name << ": wrote " << (out.dir() / "manifest.json").string() << '\n';
        } catch (const std::exception& e) {
            std::cerr << "autores " << name << ": error: " << e.what() << '\n';
            return 1;
        }
        return 0;
    }
    return 2;
}
