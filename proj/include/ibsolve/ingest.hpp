// Empirical-distribution ingestion (sample CSV -> IBProblem) and the JSON
// problem/report file formats.
#ifndef IBSOLVE_INGEST_HPP
#define IBSOLVE_INGEST_HPP

#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ibsolve/errors.hpp"
#include "ibsolve/prob_core.hpp"
#include "ibsolve/solver_types.hpp"

namespace ibsolve {

// Rows of (feature vector, categorical label), all rows with equal arity.
struct SampleTable {
    std::vector<std::vector<double>> features;
    std::vector<std::string> labels;

    std::size_t size() const { return labels.size(); }
    std::size_t arity() const { return features.empty() ? 0 : features.front().size(); }
};

/// Reads a sample CSV: one header row, then feature columns with the label in
/// the final column.
inline SampleTable read_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open sample file: " + path);
    SampleTable t;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;  // column names are not interpreted
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected at least one feature column and a label");
        std::vector<double> feats(cells.size() - 1);
        for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
            try {
                std::size_t used = 0;
                feats[c] = std::stod(cells[c], &used);
                if (used != cells[c].size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": field " +
                                 std::to_string(c + 1) + " is not numeric: '" + cells[c] + "'");
            }
        }
        if (!t.features.empty() && feats.size() != t.arity())
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(t.arity()) + " features, got " +
                             std::to_string(feats.size()));
        t.features.push_back(std::move(feats));
        t.labels.push_back(cells.back());
    }
    if (t.size() == 0) throw ParseError(path + ": no sample rows");
    return t;
}

/// Joint empirical distribution from samples: the product feature space is
/// discretized in units of `unit` (bin k covers [k unit, (k+1) unit)),
/// occupied bins become the X alphabet in lexicographic key order, labels
/// become the Y alphabet in first-appearance order, and s_ki is the label
/// frequency within bin i. Counts stay integral until the final division.
inline IBProblem bin_samples(const SampleTable& t, double unit) {
    if (!(unit > 0.0)) throw std::invalid_argument("bin_samples: unit must be > 0");
    if (t.size() == 0) throw std::invalid_argument("bin_samples: empty sample table");
    if (t.features.size() != t.labels.size())
        throw std::invalid_argument("bin_samples: feature/label row counts differ");
    for (std::size_t row = 0; row < t.size(); ++row)
        if (t.features[row].size() != t.arity())
            throw std::invalid_argument("bin_samples: row " + std::to_string(row + 1) +
                                        " has mismatched feature arity");

    std::vector<std::string> label_order;
    auto label_index = [&](const std::string& lab) -> std::size_t {
        for (std::size_t k = 0; k < label_order.size(); ++k)
            if (label_order[k] == lab) return k;
        label_order.push_back(lab);
        return label_order.size() - 1;
    };

    std::map<std::vector<long long>, std::map<std::size_t, long long>> bins;
    for (std::size_t row = 0; row < t.size(); ++row) {
        std::vector<long long> key(t.arity());
        for (std::size_t c = 0; c < t.arity(); ++c) {
            const double v = t.features[row][c];
            if (!std::isfinite(v))
                throw std::invalid_argument("bin_samples: non-finite feature in row " +
                                            std::to_string(row + 1));
            key[c] = static_cast<long long>(std::floor(v / unit));
        }
        bins[key][label_index(t.labels[row])] += 1;
    }

    const std::size_t M = bins.size(), K = label_order.size();
    const double total = static_cast<double>(t.size());
    std::vector<double> p;
    p.reserve(M);
    std::vector<double> s(K * M, 0.0);
    std::size_t i = 0;
    for (const auto& [key, counts] : bins) {
        long long bin_total = 0;
        for (const auto& [k, c] : counts) bin_total += c;
        p.push_back(static_cast<double>(bin_total) / total);
        for (const auto& [k, c] : counts)
            s[i * K + k] = static_cast<double>(c) / static_cast<double>(bin_total);
        ++i;
    }
    return IBProblem::from_parts(ProbVector(std::move(p)), CondMatrix(K, M, std::move(s)));
}

/// Problem JSON: {"p": [M], "s": [K rows of M columns]}, columns of s sum
/// to 1. nlohmann serializes doubles losslessly, so save/load round-trips
/// within strict tolerance.
inline void save_problem(const IBProblem& problem, const std::string& path) {
    nlohmann::json j;
    j["p"] = std::vector<double>(problem.p.values().begin(), problem.p.values().end());
    std::vector<std::vector<double>> rows(problem.s.rows(),
                                          std::vector<double>(problem.s.cols()));
    for (std::size_t k = 0; k < problem.s.rows(); ++k)
        for (std::size_t i = 0; i < problem.s.cols(); ++i) rows[k][i] = problem.s(k, i);
    j["s"] = rows;
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

inline IBProblem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open problem file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path + ": " + ex.what());
    }
    if (!j.contains("p") || !j.contains("s"))
        throw ParseError(path + ": expected object with \"p\" and \"s\"");
    std::vector<double> p;
    try {
        p = j.at("p").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path + ": field \"p\": " + ex.what());
    }
    std::vector<std::vector<double>> rows;
    try {
        rows = j.at("s").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path + ": field \"s\": " + ex.what());
    }
    if (rows.empty()) throw ParseError(path + ": \"s\" has no rows");
    const std::size_t K = rows.size(), M = rows.front().size();
    if (M != p.size())
        throw ParseError(path + ": \"s\" has " + std::to_string(M) + " columns but \"p\" has " +
                         std::to_string(p.size()) + " entries");
    std::vector<double> s(K * M);
    for (std::size_t k = 0; k < K; ++k) {
        if (rows[k].size() != M)
            throw ParseError(path + ": \"s\" row " + std::to_string(k) + " has " +
                             std::to_string(rows[k].size()) + " columns, expected " +
                             std::to_string(M));
        for (std::size_t i = 0; i < M; ++i) s[i * K + k] = rows[k][i];
    }
    try {
        return IBProblem::from_parts(ProbVector(std::move(p)), CondMatrix(K, M, std::move(s)));
    } catch (const std::invalid_argument& ex) {
        throw ParseError(path + ": " + ex.what());
    }
}

/// Report JSON with all fields; trajectories clipped to `max_trajectory`
/// points when requested (0 keeps everything).
inline nlohmann::json report_to_json(const SolveReport& rep, std::size_t max_trajectory = 0) {
    auto clip = [&](const std::vector<double>& v) {
        if (max_trajectory == 0 || v.size() <= max_trajectory) return v;
        return std::vector<double>(v.end() - static_cast<std::ptrdiff_t>(max_trajectory), v.end());
    };
    nlohmann::json j;
    j["value"] = rep.value;
    j["i_tx"] = rep.i_tx;
    j["i_ty"] = rep.i_ty;
    j["lambda"] = rep.lambda;
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged;
    j["objective_trajectory"] = clip(rep.objective_trajectory);
    j["residual_trajectory"] = clip(rep.residual_trajectory);
    j["wall_time_ms"] = rep.wall_time_ms;
    j["status_notes"] = rep.status_notes;
    j["descent_gap_max"] = rep.descent_gap_max;
    j["pinsker_slack_min"] = rep.pinsker_slack_min;
    j["feasibility_gap_max"] = rep.feasibility_gap_max;
    return j;
}

}  // namespace ibsolve

#endif  // IBSOLVE_INGEST_HPP
