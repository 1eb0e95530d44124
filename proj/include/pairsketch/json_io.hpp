#pragma once

#include <string>

#include "json.hpp"

#include "analysis.hpp"
#include "distribution.hpp"
#include "errors.hpp"
#include "partition.hpp"
#include "sketch.hpp"

// JSON forms. Every index written to or read from JSON is 1-based.
//
//   Partition            [[1, 2], [3], ...]
//   SamplingDistribution {"partition": <Partition>, "weights": [...]}
//   draw log             {"c": c, "seed": s, "draws": [...], "counts": [...]}
//   BoundReport          {"M", "U1", "U2", "ab_spectral", "ab_frobenius",
//                         "m_rows", "rho_cols"}
//   ThresholdResult      {"c", "k", "feasible", "s_c"}   (s_c null if infeasible)
namespace pairsketch::json {

using nlohmann::json;
using nlohmann::ordered_json;

inline ordered_json to_json(const Partition& p)
{
    ordered_json out = ordered_json::array();
    for (const auto& g : p.groups()) {
        ordered_json grp = ordered_json::array();
        for (std::size_t idx : g) grp.push_back(idx + 1);
        out.push_back(std::move(grp));
    }
    return out;
}

/// Reads a 1-based array-of-arrays partition of {1..n}.
inline Partition partition_from_json(const json& j, std::size_t n)
{
    if (!j.is_array()) throw std::invalid_argument("partition JSON must be an array of arrays");
    std::vector<IndexGroup> groups;
    for (const auto& g : j) {
        if (!g.is_array()) throw std::invalid_argument("partition JSON must be an array of arrays");
        IndexGroup grp;
        for (const auto& idx : g) {
            if (!idx.is_number_integer() || idx.get<long long>() < 1) {
                throw std::invalid_argument("partition JSON indices must be positive integers");
            }
            grp.push_back(idx.get<std::size_t>() - 1);
        }
        groups.push_back(std::move(grp));
    }
    return coarsen(std::move(groups), n);
}

inline ordered_json to_json(const SamplingDistribution& d)
{
    ordered_json out;
    out["partition"] = to_json(d.support());
    out["weights"] = std::vector<double>(d.weights().begin(), d.weights().end());
    return out;
}

inline SamplingDistribution distribution_from_json(const json& j, std::size_t n)
{
    if (!j.is_object() || !j.contains("partition") || !j.contains("weights")) {
        throw std::invalid_argument("distribution JSON needs 'partition' and 'weights'");
    }
    return SamplingDistribution(partition_from_json(j.at("partition"), n), j.at("weights").get<std::vector<double>>());
}

inline ordered_json draw_log(const SketchResult& r, const SketchConfig& cfg)
{
    ordered_json out;
    out["c"] = cfg.c;
    out["seed"] = cfg.seed;
    ordered_json draws = ordered_json::array();
    for (std::size_t d : r.draws) draws.push_back(d + 1);
    out["draws"] = std::move(draws);
    out["counts"] = r.counts;
    return out;
}

inline ordered_json to_json(const BoundReport& r)
{
    ordered_json out;
    out["M"] = r.M;
    out["U1"] = r.U1;
    out["U2"] = r.U2;
    out["ab_spectral"] = r.ab_spectral;
    out["ab_frobenius"] = r.ab_frobenius;
    out["m_rows"] = r.m_rows;
    out["rho_cols"] = r.rho_cols;
    return out;
}

inline ordered_json to_json(const ThresholdResult& t, std::size_t c, std::size_t k)
{
    ordered_json out;
    out["c"] = c;
    out["k"] = k;
    out["feasible"] = t.feasible;
    out["s_c"] = t.s_c ? ordered_json(*t.s_c) : ordered_json(nullptr);
    return out;
}

inline ordered_json to_json(const DistributionStats& s)
{
    ordered_json out;
    out["max"] = s.max;
    out["mean"] = s.mean;
    out["min"] = s.min;
    return out;
}

inline json parse(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw io_error(std::string("JSON parse error: ") + e.what());
    }
}

} // namespace pairsketch::json
