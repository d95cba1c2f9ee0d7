#include "fraclap/report.hpp"

#include "fraclap/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>
#include <stdexcept>

namespace fraclap {

namespace {

// NaN and infinities are not representable in JSON; store them as strings.
Json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

Json strip_timing(const Json& j) {
    if (j.is_object()) {
        Json out = Json::object();
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.key() == "elapsed") continue;
            out[it.key()] = strip_timing(it.value());
        }
        return out;
    }
    if (j.is_array()) {
        Json out = Json::array();
        for (const auto& e : j) out.push_back(strip_timing(e));
        return out;
    }
    return j;
}

std::string csv_field(const CsvValue& v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    if (const double* d = std::get_if<double>(&v)) {
        if (std::isfinite(*d)) {
            os << std::setprecision(17) << *d;
        } else {
            os << (std::isnan(*d) ? "nan" : (*d > 0 ? "inf" : "-inf"));
        }
        return os.str();
    }
    if (const long long* i = std::get_if<long long>(&v)) {
        os << *i;
        return os.str();
    }
    const std::string& s = std::get<std::string>(v);
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

} // namespace

Json Assertion::to_json() const {
    Json j = Json::object();
    j["name"] = name;
    j["claim"] = claim;
    j["kind"] = kind;
    j["pass"] = pass;
    if (kind == "inequality") j["degenerate"] = degenerate;
    for (auto it = detail.begin(); it != detail.end(); ++it) j[it.key()] = it.value();
    return j;
}

Assertion inequality(std::string name, std::string claim, double lhs, double rhs, double tol, double degenerate_tol) {
    const double slack = rhs - lhs;
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
    Assertion a{std::move(name), std::move(claim), "inequality", false, false, Json::object()};
    a.pass = std::isfinite(slack) && slack >= -tol * scale;
    a.degenerate = std::isfinite(slack) && std::abs(slack) < degenerate_tol * scale;
    a.detail["lhs"] = number(lhs);
    a.detail["rhs"] = number(rhs);
    a.detail["slack"] = number(slack);
    a.detail["tol"] = tol;
    return a;
}

Assertion equality(std::string name, std::string claim, double value, double reference, double tol) {
    const double diff = std::abs(value - reference);
    const double scale = std::max(std::abs(value), std::abs(reference));
    const double rel = scale > 0.0 ? diff / scale : 0.0;
    Assertion a{std::move(name), std::move(claim), "equality", false, false, Json::object()};
    a.pass = std::isfinite(rel) && rel <= tol;
    a.detail["value"] = number(value);
    a.detail["reference"] = number(reference);
    a.detail["relative_error"] = number(rel);
    a.detail["tol"] = tol;
    return a;
}

Assertion property(std::string name, std::string claim, bool pass, Json detail) {
    return Assertion{std::move(name), std::move(claim), "property", pass, false, std::move(detail)};
}

void CsvTable::write(std::ostream& out) const {
    auto line = [&](const auto& fields, auto&& render) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out << ',';
            out << render(fields[i]);
        }
        out << "\r\n";
    };
    line(header, [](const std::string& h) { return csv_field(h); });
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw Error("csv: row width does not match the header");
        line(row, [](const CsvValue& v) { return csv_field(v); });
    }
}

ExperimentReport::ExperimentReport(std::string experiment, Json config)
    : experiment_(std::move(experiment)), config_(std::move(config)) {}

const Assertion& ExperimentReport::add(Assertion a) {
    assertions_.push_back(std::move(a));
    return assertions_.back();
}

const Assertion& ExperimentReport::assertion(const std::string& name) const {
    for (const auto& a : assertions_) {
        if (a.name == name) return a;
    }
    throw std::out_of_range("report " + experiment_ + " has no assertion '" + name + "'");
}

std::size_t ExperimentReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(assertions_.begin(), assertions_.end(), [](const Assertion& a) { return !a.pass; }));
}

Json ExperimentReport::to_json(bool include_timing) const {
    Json j = Json::object();
    j["schema_version"] = kSchemaVersion;
    j["experiment"] = experiment_;
    j["config"] = config_;
    Json cells = Json::array();
    for (const auto& c : cells_) cells.push_back(include_timing ? c : strip_timing(c));
    j["cells"] = std::move(cells);
    Json assertions = Json::array();
    for (const auto& a : assertions_) assertions.push_back(a.to_json());
    j["assertions"] = std::move(assertions);
    Json summary = Json::object();
    summary["assertions"] = assertions_.size();
    summary["failed"] = failures();
    summary["passed"] = passed();
    if (include_timing) summary["elapsed"] = elapsed_;
    j["summary"] = std::move(summary);
    return j;
}

void ExperimentReport::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / (experiment_ + ".json"), std::ios::binary);
        if (!out) throw Error("cannot write report to " + (dir / (experiment_ + ".json")).string());
        out << to_json().dump(2) << '\n';
    }
    std::ofstream out(dir / (experiment_ + ".csv"), std::ios::binary);
    if (!out) throw Error("cannot write csv to " + (dir / (experiment_ + ".csv")).string());
    csv_.write(out);
}

} // namespace fraclap
