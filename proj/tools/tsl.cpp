// Experiment driver: tsl <subcommand> --config <path> [--out <dir>] [--flag k=v ...]

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <utility>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "config.hpp"
#include "criteria.hpp"
#include "tsl/cell_evolution.hpp"
#include "tsl/errors.hpp"

using namespace tsl;
using namespace tsl::cli;

namespace {

ScenarioConfig configure(const std::string& path, const std::string& out, const std::vector<std::string>& flags)
{
    ScenarioConfig c = path.empty() ? ScenarioConfig{} : load_config(path);
    for (const std::string& f : flags) {
        auto eq = f.find('=');
        if (eq == std::string::npos) throw ConfigError("--flag expects key=value, got '" + f + "'");
        set_key(c, f.substr(0, eq), f.substr(eq + 1));
    }
    if (!out.empty()) c.out = out;
    if (c.out.empty()) {
        const char* env = std::getenv("TSL_OUT");
        c.out = env && *env ? env : "tsl_out";
    }
    return c;
}

int run(const std::string& sub, const ScenarioConfig& c)
{
    write_manifest(std::cout, c);
    std::filesystem::create_directories(c.out);
    {
        std::ofstream m(std::filesystem::path(c.out) / (sub + "_manifest.txt"), std::ios::binary);
        write_manifest(m, c);
    }
    std::vector<CriterionResult> failed;
    for (int id : criteria_of(sub)) {
        CriterionResult r = run_criterion(id, c);
        std::cout << fmt::format("criterion {}: {} {} [{:.1f} s]\n", id, r.pass ? "PASS" : "FAIL", r.summary, r.seconds);
        for (const auto& i : r.info) std::cout << "  info: " << i << '\n';
        for (const auto& t : r.tables) write_csv(c.out, sub, t);
        if (!r.pass) failed.push_back(r);
    }
    if (sub == "mixing") {
        EvolutionOptions opt;
        opt.exact = c.exact();
        CellGrid half = solution_grid(c.lambda, SolutionVariant::unmixing(), Dyadic::pow2(-1), opt);
        std::ofstream g(std::filesystem::path(c.out) / "mixing_half_time_grid.csv", std::ios::binary);
        write_grid_csv(g, half);
        if (c.svg) {
            std::ofstream f(std::filesystem::path(c.out) / "mixing_half_time.svg", std::ios::binary);
            write_grid_svg(f, to_real(half), 16);
        }
    }
    if (failed.empty()) return 0;
    auto path = std::filesystem::path(c.out) / (sub + "_failures.txt");
    std::ofstream m(path, std::ios::binary);
    for (const auto& r : failed) {
        m << "criterion " << r.id << ": " << r.summary << '\n';
        for (const auto& i : r.info) m << "  " << i << '\n';
    }
    std::cerr << "assertion failures written to " << path.string() << '\n';
    return 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two limits from one field: exact checks and experiments"};
    app.require_subcommand(1);
    std::string config, out;
    std::vector<std::string> flags;
    const std::pair<const char*, const char*> subs[] = {
        {"mixing", "rigidity, half-time chessboard and mixing identities (criteria 1-3)"},
        {"truncation", "truncated solutions (criterion 4)"},
        {"density", "Lp distance ladder (criterion 6)"},
        {"perturbed", "composed flows and compressibility envelopes (criteria 7, 8)"},
        {"regularize", "k selection and the two-limit demonstration (criterion 9)"},
        {"oracle", "weak residual and upwind concordance (criteria 5, 10)"},
        {"all", "every criterion"}};
    for (const auto& [name, help] : subs) {
        CLI::App* s = app.add_subcommand(name, help);
        s->add_option("--config", config, "key = value config file");
        s->add_option("--out", out, "output directory (default $TSL_OUT, then ./tsl_out)");
        s->add_option("--flag", flags, "override one key, key=value")->take_all();
    }
    CLI::App* m = app.add_subcommand("config", "print the effective configuration");
    m->add_option("--config", config, "key = value config file");
    m->add_option("--flag", flags, "override one key, key=value")->take_all();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        CLI::App* sub = app.get_subcommands().front();
        ScenarioConfig c = configure(config, out, flags);
        if (sub->get_name() == "config") {
            write_manifest(std::cout, c);
            return 0;
        }
        return run(sub->get_name(), c);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
