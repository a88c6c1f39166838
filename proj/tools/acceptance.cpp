// One pass/fail line per acceptance criterion.

#include <iostream>

#include <fmt/format.h>

#include "config.hpp"
#include "criteria.hpp"
#include "tsl/errors.hpp"

using namespace tsl::cli;

int main(int argc, char** argv)
{
    ScenarioConfig c;
    std::vector<int> ids;
    try {
        for (int i = 1; i < argc; ++i) {
            std::string a = argv[i];
            if (a == "--config" && i + 1 < argc) c = load_config(argv[++i]);
            else if (a.find('=') != std::string::npos) set_key(c, a.substr(0, a.find('=')), a.substr(a.find('=') + 1));
            else ids.push_back(std::stoi(a));
        }
    } catch (const std::exception& e) {
        std::cerr << "usage: tsl_acceptance [--config path] [key=value ...] [criterion ids]\n" << e.what() << '\n';
        return 2;
    }
    if (ids.empty()) ids = criteria_of("all");
    int failed = 0;
    for (int id : ids) {
        CriterionResult r = run_criterion(id, c);
        std::cout << fmt::format("criterion {:2}: {} {} [{:.1f} s]\n", id, r.pass ? "PASS" : "FAIL", r.summary, r.seconds);
        for (const auto& i : r.info) std::cout << "              info: " << i << '\n';
        std::cout.flush();
        failed += !r.pass;
    }
    std::cout << fmt::format("{} of {} criteria pass\n", ids.size() - failed, ids.size());
    return failed ? 1 : 0;
}
