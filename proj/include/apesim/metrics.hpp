#pragma once

#include "errors.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace apesim {

// Shortest round-trip decimal form; identical runs print identical digits.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct MetricRow {
    std::string experiment;
    std::string params; // "key=value;key=value"
    std::string metric;
    std::string value;
    std::string unit;
};

class MetricsTable {
public:
    void add(std::string experiment, std::string params, std::string metric, std::int64_t value, std::string unit) {
        rows_.push_back({std::move(experiment), std::move(params), std::move(metric), std::to_string(value),
                         std::move(unit)});
    }
    void add(std::string experiment, std::string params, std::string metric, double value, std::string unit) {
        rows_.push_back(
            {std::move(experiment), std::move(params), std::move(metric), format_double(value), std::move(unit)});
    }

    void add_row(MetricRow row) { rows_.push_back(std::move(row)); }

    const std::vector<MetricRow>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }
    std::size_t size() const { return rows_.size(); }

    void append(const MetricsTable& other) {
        rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
    }

    // First value matching (experiment, metric) and, when given, a params
    // substring. Throws if absent: harness lookups are never optional.
    double value_of(const std::string& experiment, const std::string& metric,
                    const std::string& params_contains = {}) const {
        for (const MetricRow& r : rows_) {
            if (r.experiment != experiment || r.metric != metric) continue;
            if (!params_contains.empty() && r.params.find(params_contains) == std::string::npos) continue;
            return std::stod(r.value);
        }
        throw SimError("metrics: no row for " + experiment + "/" + metric +
                       (params_contains.empty() ? "" : " with " + params_contains));
    }

    void to_csv(std::ostream& out) const {
        out << "experiment,params,metric,value,unit\n";
        for (const MetricRow& r : rows_) {
            out << escape(r.experiment) << ',' << escape(r.params) << ',' << escape(r.metric) << ','
                << escape(r.value) << ',' << escape(r.unit) << '\n';
        }
    }

    std::string to_csv_string() const {
        std::ostringstream oss;
        to_csv(oss);
        return oss.str();
    }

private:
    // RFC 4180: quote fields containing comma, quote or newline.
    static std::string escape(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (const char c : s) {
            if (c == '"') out += "\"\"";
            else out += c;
        }
        out += '"';
        return out;
    }

    std::vector<MetricRow> rows_;
};

inline void export_csv(const MetricsTable& table, const std::string& path) {
    if (table.empty()) throw ConfigError("export_csv: table is empty");
    std::ofstream out(path, std::ios::binary); // binary keeps LF endings everywhere
    if (!out) throw ConfigError("export_csv: cannot write '" + path + "'");
    table.to_csv(out);
}

} // namespace apesim
