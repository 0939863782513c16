#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../cell.hpp"

namespace phasehom::harness {

inline constexpr const char* kToolVersion = "0.1.0";

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

/// Shortest round-trip decimal form, so reruns give identical bytes.
inline std::string num(double v) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << std::setprecision(17) << v;
    return s.str();
}

inline std::string iso_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

/// Cell records as CSV. wall_ms is only emitted on request so that reruns are byte-identical.
template <std::size_t Dim>
std::string records_csv(const std::vector<CellRecord<Dim>>& recs, bool timings = false) {
    std::ostringstream s;
    s << "nu_deg,r,seed,x0_index,m_hat,normalized,iters,grad_norm";
    if (timings) s << ",wall_ms";
    s << ",work_item\n";
    for (const auto& r : recs) {
        s << num(r.nu_deg) << ',' << num(r.r) << ',' << r.seed << ',' << r.x0_index << ',' << num(r.m_hat) << ','
          << num(r.normalized) << ',' << r.iters << ',' << num(r.grad_norm);
        if (timings) s << ',' << num(r.wall_ms);
        s << ',' << r.work_item << '\n';
    }
    return s.str();
}

template <std::size_t Dim>
nlohmann::json record_json(const CellRecord<Dim>& r) {
    return {{"nu_deg", r.nu_deg},       {"r", r.r},
            {"seed", r.seed},           {"x0_index", r.x0_index},
            {"m_hat", r.m_hat},         {"normalized", r.normalized},
            {"iters", r.iters},         {"grad_norm", r.grad_norm},
            {"converged", r.converged}, {"work_item", r.work_item}};
}

inline nlohmann::json sigma_json(const SigmaEstimate& e) {
    nlohmann::json vals = nlohmann::json::array();
    for (double v : e.values) vals.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
    return {{"variant", e.variant == EnergyVariant::m_plus ? "plus" : "minus"},
            {"value", e.value},
            {"best_epsilon", e.best_epsilon},
            {"epsilon_grid", e.epsilon_grid},
            {"values", vals},
            {"warnings", e.warnings}};
}

struct ProvenanceEntry {
    std::uint64_t seed = 0;
    std::string work_item;
    double wall_ms = 0.0;
};

/// Run manifest: config hash, tool version, per-record provenance and timestamps.
/// Only this file carries timing, so every other output is reproducible byte for byte.
struct RunManifest {
    std::string command;
    std::uint64_t config_hash = 0;
    std::string started;
    std::string finished;
    unsigned threads = 1;
    std::vector<ProvenanceEntry> records;

    template <std::size_t Dim>
    void add(const std::vector<CellRecord<Dim>>& recs) {
        for (const auto& r : recs) records.push_back({r.seed, r.work_item, r.wall_ms});
    }

    nlohmann::json to_json() const {
        nlohmann::json recs = nlohmann::json::array();
        for (const auto& r : records) recs.push_back({{"seed", r.seed}, {"work_item", r.work_item}, {"wall_ms", r.wall_ms}});
        return {{"command", command},   {"config_hash", hex64(config_hash)},
                {"tool_version", kToolVersion}, {"started", started},
                {"finished", finished}, {"threads", threads},
                {"records", recs}};
    }
};

}  // namespace phasehom::harness
