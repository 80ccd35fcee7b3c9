// apesim: scenario-driven simulator of the APEnet+ 3D-torus interconnect.
//
// Subcommands:
//   run <config>          run one scenario, export CSVs, print a summary
//   validate <config>     parse + validate, print the normalized echo
//   sweep <config> --param key=v1,v2,...   re-run the scenario per value
//   repro-paper           run the reference suites and check the fixed points
//
// Exit codes: 0 success, 2 configuration error, 3 tolerance failure.

#include <apesim/apesim.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace apesim;

std::string slurp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

CalibrationDefaults load_calibration(const std::string& flag_path) {
    std::string path = flag_path;
    if (path.empty()) {
        if (const char* env = std::getenv("APESIM_CALIBRATION")) path = env;
    }
    if (path.empty()) return CalibrationDefaults{};
    return CalibrationDefaults::load_file(path);
}

void write_outputs(const ScenarioConfig& cfg, const ScenarioResult& res, const std::string& outdir) {
    std::filesystem::create_directories(outdir);
    const std::string base = (std::filesystem::path(outdir) / to_string(cfg.kind)).string();
    export_csv(res.metrics, base + ".csv");
    std::cout << "wrote " << base << ".csv\n";
    if (!res.traces.empty()) {
        export_traces_csv(res.traces, res.trace_wd_ms, base + "_traces.csv");
        std::cout << "wrote " << base << "_traces.csv\n";
    }
}

int cmd_run(const std::string& config_path, const std::string& outdir, const std::string& calib_path,
            const std::string& trace_path) {
    const CalibrationDefaults calib = load_calibration(calib_path);
    const ScenarioConfig cfg = ScenarioConfig::load_file(config_path);
    std::cout << cfg.normalize(); // effective configuration, defaults included

    std::ofstream trace;
    std::ostream* trace_ptr = nullptr;
    if (!trace_path.empty()) {
        trace.open(trace_path, std::ios::binary);
        if (!trace) throw ConfigError("cannot write trace '" + trace_path + "'");
        trace_ptr = &trace;
    }

    const ScenarioResult res = run_scenario(cfg, calib, trace_ptr);
    write_outputs(cfg, res, outdir);
    if (cfg.kind == ExperimentKind::latency) std::cout << compare_report(res.metrics, calib);
    return 0;
}

int cmd_validate(const std::string& config_path) {
    const ScenarioConfig cfg = ScenarioConfig::load_file(config_path);
    std::cout << cfg.normalize();
    std::cout << "# ok\n";
    return 0;
}

// Replaces (or appends) one key in the raw config text.
std::string override_key(const std::string& text, const std::string& key, const std::string& value) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    bool replaced = false;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos && kv::trim(line.substr(0, eq)) == key) {
            out << key << " = " << value << "\n";
            replaced = true;
        } else {
            out << line << "\n";
        }
    }
    if (!replaced) out << key << " = " << value << "\n";
    return out.str();
}

int cmd_sweep(const std::string& config_path, const std::string& param, const std::string& outdir,
              const std::string& calib_path) {
    const auto eq = param.find('=');
    if (eq == std::string::npos) throw ConfigError("--param expects key=value1,value2,...");
    const std::string key = param.substr(0, eq);
    const std::vector<std::string> values = kv::split(param.substr(eq + 1), ',');
    if (values.empty() || values.front().empty()) throw ConfigError("--param needs at least one value");

    const CalibrationDefaults calib = load_calibration(calib_path);
    const std::string text = slurp_file(config_path);

    MetricsTable merged;
    for (const std::string& value : values) { // deterministic parameter order
        const ScenarioConfig cfg = ScenarioConfig::from_string(override_key(text, key, value));
        const ScenarioResult res = run_scenario(cfg, calib);
        for (const MetricRow& row : res.metrics.rows()) {
            MetricRow tagged = row;
            tagged.params = key + "=" + value + (row.params.empty() ? "" : ";" + row.params);
            merged.add_row(std::move(tagged));
        }
    }
    std::filesystem::create_directories(outdir);
    const std::string path = (std::filesystem::path(outdir) / "sweep.csv").string();
    export_csv(merged, path);
    std::cout << "wrote " << path << " (" << merged.size() << " rows)\n";
    return 0;
}

int cmd_repro(const std::string& outdir, std::uint64_t seed, const std::string& calib_path) {
    const CalibrationDefaults calib = load_calibration(calib_path);
    const ReproResult res = repro_paper(outdir, seed, calib);
    for (const std::string& f : res.files) std::cout << "wrote " << f << "\n";
    std::cout << res.comparison;
    if (!res.ok) {
        for (const std::string& f : res.failures) std::cerr << "TOLERANCE FAIL: " << f << "\n";
        return 3;
    }
    std::cout << "all reference fixed points reproduced\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"apesim: deterministic simulator of the APEnet+ 3D-torus interconnect"};
    app.require_subcommand(1);

    std::string config_path, outdir = "out", calib_path, trace_path, param;
    std::uint64_t seed = 1;

    CLI::App* run = app.add_subcommand("run", "run one scenario and export CSVs");
    run->add_option("config", config_path, "scenario config file")->required();
    run->add_option("--out", outdir, "output directory");
    run->add_option("--calibration", calib_path, "calibration file (else $APESIM_CALIBRATION, else built-ins)");
    run->add_option("--trace", trace_path, "write the per-event trace to this file");

    CLI::App* validate = app.add_subcommand("validate", "parse and validate a scenario config");
    validate->add_option("config", config_path, "scenario config file")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "run the scenario once per parameter value");
    sweep->add_option("config", config_path, "scenario config file")->required();
    sweep->add_option("--param", param, "key=value1,value2,... to sweep")->required();
    sweep->add_option("--out", outdir, "output directory");
    sweep->add_option("--calibration", calib_path, "calibration file");

    CLI::App* repro = app.add_subcommand("repro-paper", "run the reference suites and verify fixed points");
    repro->add_option("--out", outdir, "output directory");
    repro->add_option("--seed", seed, "master seed");
    repro->add_option("--calibration", calib_path, "calibration file");

    try {
        app.parse(argc, argv);
        if (*run) return cmd_run(config_path, outdir, calib_path, trace_path);
        if (*validate) return cmd_validate(config_path);
        if (*sweep) return cmd_sweep(config_path, param, outdir, calib_path);
        if (*repro) return cmd_repro(outdir, seed, calib_path);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
