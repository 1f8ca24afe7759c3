#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qas/errors.hpp"

namespace qas {

enum class ScheduleKind { linear, tabulated };

/// One row of a tabulated schedule: normalized time s and the envelope
/// values A(s), B(s) in units of h*GHz.
struct ScheduleRow {
    double s = 0.0;
    double A = 0.0;
    double B = 0.0;
};

/// Annealing schedule: envelopes A(s), B(s) over s = t / tau, plus the total
/// anneal time tau in microseconds.
///
/// Construction enforces A(0) >= 10 * B(0) (driver dominates at the start)
/// and A(1) <= 0.01 * A(0) (driver effectively off at the end).
class Schedule {
public:
    static Schedule linear(double a_max, double b_max, double tau_us) {
        Schedule sched;
        sched.kind_ = ScheduleKind::linear;
        sched.a_max_ = a_max;
        sched.b_max_ = b_max;
        sched.tau_us_ = tau_us;
        std::ostringstream id;
        id << "linear(A=" << a_max << ",B=" << b_max << ")";
        sched.id_ = id.str();
        sched.validate();
        return sched;
    }

    static Schedule tabulated(std::vector<ScheduleRow> rows, double tau_us,
                              std::string id = "tabulated") {
        Schedule sched;
        sched.kind_ = ScheduleKind::tabulated;
        sched.table_ = std::move(rows);
        sched.tau_us_ = tau_us;
        sched.id_ = std::move(id);
        sched.validate();
        return sched;
    }

    /// Smooth monotone crossover in the style of a DW2000Q schedule:
    /// A(s) = 6 (1-s)^2 exp(-3s), B(s) = 0.1 + 11.9 s^2, tabulated on a
    /// 101-point grid. A(0) = 6 and B(1) = 12 h*GHz.
    static Schedule dw2000q_like(double tau_us) {
        std::vector<ScheduleRow> rows;
        rows.reserve(101);
        for (int i = 0; i <= 100; ++i) {
            const double s = static_cast<double>(i) / 100.0;
            rows.push_back({s, 6.0 * (1.0 - s) * (1.0 - s) * std::exp(-3.0 * s),
                            0.1 + 11.9 * s * s});
        }
        return tabulated(std::move(rows), tau_us, "dw2000q-like");
    }

    /// Load a tabulated schedule from CSV with header "s,A,B".
    static Schedule from_csv(const std::string& path, double tau_us) {
        std::ifstream in(path);
        if (!in)
            throw ParseError("cannot open schedule file: " + path);
        std::string line;
        if (!std::getline(in, line))
            throw ParseError(path + ": empty schedule file");
        if (strip(line) != "s,A,B")
            throw ParseError(path + ": expected header 's,A,B', got '" + line + "'");
        std::vector<ScheduleRow> rows;
        int lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (strip(line).empty())
                continue;
            ScheduleRow row;
            char comma1 = 0, comma2 = 0;
            std::istringstream fields(line);
            fields >> row.s >> comma1 >> row.A >> comma2 >> row.B;
            if (!fields || comma1 != ',' || comma2 != ',')
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": malformed schedule row '" + line + "'");
            rows.push_back(row);
        }
        return tabulated(std::move(rows), tau_us, "csv:" + path);
    }

    void to_csv(std::ostream& out) const {
        out << "s,A,B\n";
        if (kind_ == ScheduleKind::linear) {
            out << format(0.0) << ',' << format(a_max_) << ",0\n";
            out << format(1.0) << ",0," << format(b_max_) << '\n';
            return;
        }
        for (const ScheduleRow& row : table_)
            out << format(row.s) << ',' << format(row.A) << ',' << format(row.B) << '\n';
    }

    /// Envelope values (A, B) at normalized time s in [0, 1].
    std::pair<double, double> evaluate(double s) const {
        if (!(s >= 0.0 && s <= 1.0))
            throw ParameterError("schedule argument must lie in [0, 1], got " +
                                 std::to_string(s));
        if (kind_ == ScheduleKind::linear)
            return {a_max_ * (1.0 - s), b_max_ * s};
        auto upper = std::upper_bound(table_.begin(), table_.end(), s,
                                      [](double v, const ScheduleRow& row) { return v < row.s; });
        if (upper == table_.begin())
            return {table_.front().A, table_.front().B};
        if (upper == table_.end())
            return {table_.back().A, table_.back().B};
        const ScheduleRow& hi = *upper;
        const ScheduleRow& lo = *(upper - 1);
        const double w = (s - lo.s) / (hi.s - lo.s);
        return {lo.A + w * (hi.A - lo.A), lo.B + w * (hi.B - lo.B)};
    }

    double tau_us() const { return tau_us_; }

    Schedule with_tau(double tau_us) const {
        Schedule copy = *this;
        if (!(tau_us >= 0.0))
            throw ParameterError("tau must be non-negative");
        copy.tau_us_ = tau_us;
        return copy;
    }

    /// Largest envelope value over the whole schedule; sets the step size.
    double max_energy() const {
        if (kind_ == ScheduleKind::linear)
            return std::max(a_max_, b_max_);
        double m = 0.0;
        for (const ScheduleRow& row : table_)
            m = std::max({m, row.A, row.B});
        return m;
    }

    ScheduleKind kind() const { return kind_; }
    const std::string& id() const { return id_; }
    const std::vector<ScheduleRow>& table() const { return table_; }

private:
    Schedule() = default;

    static std::string strip(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos)
            return "";
        const auto end = s.find_last_not_of(" \t\r\n");
        return s.substr(begin, end - begin + 1);
    }

    static std::string format(double v) {
        std::ostringstream out;
        out.precision(17);
        out << v;
        return out.str();
    }

    void validate() const {
        if (!(tau_us_ >= 0.0) || !std::isfinite(tau_us_))
            throw ValidationError("tau must be finite and non-negative");
        if (kind_ == ScheduleKind::linear) {
            if (!(a_max_ > 0.0) || b_max_ < 0.0)
                throw ValidationError("linear schedule needs a_max > 0 and b_max >= 0");
        } else {
            if (table_.size() < 2)
                throw ValidationError("tabulated schedule needs at least two rows");
            for (std::size_t i = 0; i < table_.size(); ++i) {
                const ScheduleRow& row = table_[i];
                if (!std::isfinite(row.s) || !std::isfinite(row.A) || !std::isfinite(row.B))
                    throw ValidationError("schedule rows must be finite");
                if (row.A < 0.0 || row.B < 0.0)
                    throw ValidationError("schedule envelopes must be non-negative");
                if (i > 0 && !(table_[i - 1].s < row.s))
                    throw ValidationError("schedule s values must be strictly increasing");
            }
            if (table_.front().s != 0.0 || table_.back().s != 1.0)
                throw ValidationError("tabulated schedule must cover s = 0 and s = 1");
        }
        const auto [a0, b0] = evaluate(0.0);
        const auto [a1, b1] = evaluate(1.0);
        (void)b1;
        if (a0 / std::max(b0, 1e-12) < 10.0)
            throw ValidationError("schedule must start driver-dominated: A(0) >= 10 B(0)");
        if (a1 > 0.01 * a0)
            throw ValidationError("driver must be off at the end: A(1) <= 0.01 A(0)");
    }

    ScheduleKind kind_ = ScheduleKind::linear;
    double a_max_ = 0.0;
    double b_max_ = 0.0;
    double tau_us_ = 0.0;
    std::vector<ScheduleRow> table_;
    std::string id_;
};

} // namespace qas
