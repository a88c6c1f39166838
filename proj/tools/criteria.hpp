#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace tsl::cli {

struct Table {
    Table() = default;
    Table(std::string n, std::vector<std::string> cols) : name(std::move(n)), columns(std::move(cols)) {}

    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string cell(double x);
std::string cell(int x);
std::string cell(bool x);
std::string cell(const std::string& x);

struct CriterionResult {
    explicit CriterionResult(int i = 0) : id(i) {}

    int id = 0;
    bool pass = false;
    std::string summary;
    std::vector<std::string> info;
    std::vector<Table> tables;
    double seconds = 0;
};

CriterionResult run_criterion(int id, const ScenarioConfig& c);

/// Criteria covered by a subcommand (mixing, truncation, density, perturbed, regularize, oracle, all).
std::vector<int> criteria_of(const std::string& subcommand);

/// CSV with a "# tsl-<name> v1" header comment, LF line endings.
void write_csv(const std::string& dir, const std::string& prefix, const Table& t);

}  // namespace tsl::cli
