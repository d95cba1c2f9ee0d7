#pragma once

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace fraclap {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// One checked statement. Inequalities read lhs <= rhs and store
/// slack = rhs - lhs; they pass when slack >= -tol * max(|lhs|, |rhs|, 1).
struct Assertion {
    std::string name;
    std::string claim; ///< short tag naming the mathematical statement checked
    std::string kind;  ///< "inequality", "equality" or "property"
    bool pass = false;
    bool degenerate = false; ///< inequality holding with (near) equality
    Json detail = Json::object();

    Json to_json() const;
};

Assertion inequality(std::string name, std::string claim, double lhs, double rhs, double tol,
                     double degenerate_tol = 1e-13);
/// |value - reference| <= tol * max(|value|, |reference|).
Assertion equality(std::string name, std::string claim, double value, double reference, double tol);
Assertion property(std::string name, std::string claim, bool pass, Json detail = Json::object());

using CsvValue = std::variant<double, long long, std::string>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<CsvValue>> rows;

    void write(std::ostream& out) const;
};

class ExperimentReport {
public:
    ExperimentReport(std::string experiment, Json config);

    const std::string& experiment() const { return experiment_; }

    void add_cell(Json cell) { cells_.push_back(std::move(cell)); }
    const Assertion& add(Assertion a);

    const std::vector<Json>& cells() const { return cells_; }
    const std::vector<Assertion>& assertions() const { return assertions_; }
    /// First assertion with the given name; throws std::out_of_range.
    const Assertion& assertion(const std::string& name) const;

    CsvTable& csv() { return csv_; }
    const CsvTable& csv() const { return csv_; }

    std::size_t failures() const;
    bool passed() const { return failures() == 0; }

    void set_elapsed(double seconds) { elapsed_ = seconds; }
    double elapsed() const { return elapsed_; }

    /// Keys in a fixed order: schema_version, experiment, config, cells,
    /// assertions, summary. Timing fields are dropped when include_timing is off.
    Json to_json(bool include_timing = true) const;

    /// Writes <dir>/<experiment>.json and <dir>/<experiment>.csv.
    void write(const std::filesystem::path& dir) const;

private:
    std::string experiment_;
    Json config_;
    std::vector<Json> cells_;
    std::vector<Assertion> assertions_;
    CsvTable csv_;
    double elapsed_ = 0.0;
};

} // namespace fraclap
