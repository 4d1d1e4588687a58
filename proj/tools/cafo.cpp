#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cafo/cli.hpp"
#include "cafo/service.hpp"

namespace fs = std::filesystem;
using namespace cafo;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot read " + p.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::int64_t> parse_frames(const std::string& list) {
    std::vector<std::int64_t> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoll(item));
    return out;
}

FailoverConfig load_config(const std::string& source, const fs::path& base, const std::string& seed_file) {
    if (source != "builtin") {
        fs::path p = source;
        if (p.is_relative()) p = base / p;
        return config_from_json(slurp(p));
    }
    if (!seed_file.empty())
        return build_config(builtin("p92_gun"), builtin_catalog(), params_from_json(slurp(seed_file)));
    return default_config();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cellular-automaton failover simulator"};
    app.require_subcommand(1);

    std::string scenario_path, frames, out_dir, seed_config;
    auto* run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("scenario", scenario_path, "scenario JSON")->required();
    run->add_option("--frames", frames, "extra frame dump generations, comma separated");
    run->add_option("--out", out_dir, "output directory")->default_val("out");
    run->add_option("--seed-config", seed_config, "layout knobs used to seed the alignment search");

    auto* validate = app.add_subcommand("validate", "Check builtin patterns and catalog reactions");

    std::string spec_path, discover_out;
    auto* discover = app.add_subcommand("discover", "Search reactions described by a spec file");
    discover->add_option("spec", spec_path, "discovery spec JSON")->required();
    discover->add_option("--out", discover_out, "directory for reactions.json (stdout if omitted)");

    std::string config_out, config_seed;
    auto* config = app.add_subcommand("config", "Build the failover layout and print it as JSON");
    config->add_option("--out", config_out, "directory for config.json (stdout if omitted)");
    config->add_option("--seed-config", config_seed, "layout knobs used to seed the alignment search");

    std::string listen = "127.0.0.1:7878";
    auto* serve = app.add_subcommand("serve", "Host interactive sessions over line-delimited JSON");
    serve->add_option("--listen", listen, "host:port")->default_val(listen);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            Scenario s;
            try {
                s = parse_scenario(slurp(scenario_path));
                auto extra = parse_frames(frames);
                s.frames.insert(s.frames.end(), extra.begin(), extra.end());
                for (auto g : extra)
                    if (g < 0 || g > s.total) throw std::invalid_argument("--frames: generation outside [0, total]");
            } catch (const std::exception& e) {
                std::cerr << "invalid scenario: " << e.what() << "\n";
                return 3;
            }
            auto cfg = load_config(s.config, fs::path(scenario_path).parent_path(), seed_config);
            auto r = run_scenario(s, cfg, out_dir);
            for (const auto& f : r.failovers)
                std::cout << "failover kill=" << f.kill << " complete=" << f.complete << " latency=" << f.latency
                          << " bound=" << f.bound << "\n";
            for (const auto& v : r.violations) std::cerr << "violation: " << v << "\n";
            if (!r.error.empty()) std::cerr << "error: " << r.error << "\n";
            std::cout << "events=" << r.events.size() << " hash=" << hash_hex(r.final_hash) << " exit=" << r.exit_code
                      << "\n";
            return r.exit_code;
        }
        if (*validate) {
            auto rows = validate_assets(builtin_catalog());
            std::cout << format_validation(rows);
            for (const auto& r : rows)
                if (!r.pass) return 1;
            return 0;
        }
        if (*discover) {
            auto cat = discover_catalog(slurp(spec_path));
            auto text = catalog_to_json(cat);
            if (discover_out.empty()) {
                std::cout << text;
            } else {
                fs::create_directories(discover_out);
                std::ofstream(fs::path(discover_out) / "reactions.json", std::ios::binary) << text;
                for (const auto& r : cat)
                    std::cerr << r.name << ": " << kind_name(r.outcome.kind) << " offset (" << r.projectile.pos.x << ","
                              << r.projectile.pos.y << ") phase " << r.projectile.phase << "\n";
            }
            return 0;
        }
        if (*serve) {
            auto colon = listen.rfind(':');
            if (colon == std::string::npos) throw std::invalid_argument("--listen expects host:port");
            SessionHost host;
            TcpServer server(host, listen.substr(0, colon), std::stoi(listen.substr(colon + 1)));
            int port = server.start();
            std::cout << "listening on " << listen.substr(0, colon) << ":" << port << std::endl;
            server.serve();
            return 0;
        }
        if (*config) {
            auto cfg = config_seed.empty()
                           ? default_config()
                           : build_config(builtin("p92_gun"), builtin_catalog(), params_from_json(slurp(config_seed)));
            auto text = config_to_json(cfg);
            if (config_out.empty()) {
                std::cout << text;
            } else {
                fs::create_directories(config_out);
                std::ofstream(fs::path(config_out) / "config.json", std::ios::binary) << text;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
