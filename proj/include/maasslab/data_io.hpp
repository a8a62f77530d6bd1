#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "maasslab/errors.hpp"
#include "maasslab/hecke.hpp"
#include "maasslab/primes.hpp"

namespace maass {

inline constexpr const char* kToolVersion = "0.1.0";

// Serialized carrier for one form: label, spectral data, and the prime
// eigenvalue list (sorted, duplicate-free).
struct FormRecord {
    std::string label;
    double r = 0.0;
    int parity = 0;
    std::vector<std::pair<std::uint64_t, double>> eigs;
    std::string source = "synthetic";  // lmfdb | synthetic | fixture
    std::string fetched_at;
    std::optional<double> norm_alpha;
    std::optional<std::string> provenance;  // e.g. upstream normalization note
};

// Checks the record invariants; throws validation_error naming the record.
inline void validate_record(const FormRecord& rec) {
    const std::string who = "record '" + rec.label + "'";
    if (!(rec.r > 0)) throw validation_error(who + ": r must be positive");
    if (rec.parity != 0 && rec.parity != 1)
        throw validation_error(who + ": parity must be 0 or 1");
    std::uint64_t prev = 0;
    for (auto& [p, lam] : rec.eigs) {
        if (p <= prev)
            throw validation_error(who + ": eigs not sorted or duplicate at p = " +
                                   std::to_string(p));
        prev = p;
        if (!is_prime(p))
            throw validation_error(who + ": index " + std::to_string(p) +
                                   " is not prime");
        if (std::abs(lam) > hecke_norm(p) + 1e-12) {
            std::ostringstream msg;
            msg << who << ": |lambda(" << p << ")| = " << std::abs(lam)
                << " exceeds n(" << p << ") = " << hecke_norm(p);
            throw validation_error(msg.str());
        }
    }
    // prime coverage must be gap-free so p_cap is well defined
    if (!rec.eigs.empty()) {
        const auto expect = primes_up_to(rec.eigs.back().first);
        if (expect.size() != rec.eigs.size())
            throw validation_error(who + ": gap in prime coverage below p = " +
                                   std::to_string(rec.eigs.back().first));
    }
}

inline MaassFormData to_form(const FormRecord& rec) {
    validate_record(rec);
    std::map<std::uint64_t, double> eigs(rec.eigs.begin(), rec.eigs.end());
    const std::uint64_t p_cap = rec.eigs.empty() ? 0 : rec.eigs.back().first;
    const auto source = rec.source == "synthetic" ? MaassFormData::Source::synthetic
                                                  : MaassFormData::Source::ingested;
    return MaassFormData(rec.r, rec.parity, std::move(eigs), p_cap, source,
                         rec.norm_alpha);
}

inline FormRecord to_record(const MaassFormData& form, std::string label,
                            std::string source = "synthetic") {
    FormRecord rec;
    rec.label = std::move(label);
    rec.r = form.r();
    rec.parity = form.parity();
    rec.eigs.assign(form.prime_eigs().begin(), form.prime_eigs().end());
    rec.source = std::move(source);
    rec.norm_alpha = form.norm_alpha();
    return rec;
}

inline nlohmann::json record_to_json(const FormRecord& rec) {
    nlohmann::json j;
    j["label"] = rec.label;
    j["r"] = rec.r;
    j["parity"] = rec.parity;
    auto eigs = nlohmann::json::array();
    for (auto& [p, lam] : rec.eigs) eigs.push_back({p, lam});
    j["eigs"] = std::move(eigs);
    j["source"] = rec.source;
    j["fetched_at"] = rec.fetched_at;
    if (rec.norm_alpha) j["norm_alpha"] = *rec.norm_alpha;
    if (rec.provenance) j["provenance"] = *rec.provenance;
    return j;
}

inline FormRecord record_from_json(const nlohmann::json& j) {
    FormRecord rec;
    rec.label = j.at("label").get<std::string>();
    rec.r = j.at("r").get<double>();
    rec.parity = j.at("parity").get<int>();
    for (const auto& pair : j.at("eigs")) {
        rec.eigs.emplace_back(pair.at(0).get<std::uint64_t>(),
                              pair.at(1).get<double>());
    }
    rec.source = j.value("source", "synthetic");
    rec.fetched_at = j.value("fetched_at", "");
    if (j.contains("norm_alpha")) rec.norm_alpha = j.at("norm_alpha").get<double>();
    if (j.contains("provenance")) rec.provenance = j.at("provenance").get<std::string>();
    return rec;
}

// JSON-lines dataset, one record per line.  Doubles survive the round trip
// exactly (shortest-exact serialization).
inline void save_dataset(const std::vector<FormRecord>& records,
                         const std::filesystem::path& path) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw error("save_dataset: cannot open " + tmp);
        for (const auto& rec : records)
            out << record_to_json(rec).dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

inline std::vector<FormRecord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error("load_dataset: cannot open " + path.string());
    std::vector<FormRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw parse_error("load_dataset: " + path.string() + ":" +
                              std::to_string(lineno) + ": " + ex.what());
        }
        FormRecord rec;
        try {
            rec = record_from_json(j);
        } catch (const nlohmann::json::exception& ex) {
            throw parse_error("load_dataset: " + path.string() + ":" +
                              std::to_string(lineno) + ": " + ex.what());
        }
        validate_record(rec);
        records.push_back(std::move(rec));
    }
    return records;
}

// FNV-1a content address for selector-keyed cache files.
inline std::string selector_hash(const std::string& selector) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : selector) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream hex;
    hex << std::hex << h;
    return hex.str();
}

// Structured result of one CLI run: the echoed configuration (sufficient to
// reproduce the run), the deterministic results, and non-replayable metadata
// (tool version, wall clock).
struct ExperimentReport {
    nlohmann::json config;
    nlohmann::json results;
    nlohmann::json meta;

    nlohmann::json to_json() const {
        return nlohmann::json{{"config", config}, {"results", results}, {"meta", meta}};
    }

    void write(const std::filesystem::path& path) const {
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) throw error("ExperimentReport: cannot open " + tmp);
            out << to_json().dump(1) << '\n';
        }
        std::filesystem::rename(tmp, path);
    }
};

// Plain-text table rendering of a flat JSON object.
inline std::string render_table(const nlohmann::json& obj) {
    std::ostringstream out;
    std::size_t width = 0;
    for (auto it = obj.begin(); it != obj.end(); ++it)
        width = std::max(width, it.key().size());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        out << it.key() << std::string(width - it.key().size() + 2, ' ')
            << it.value().dump() << '\n';
    }
    return out.str();
}

}  // namespace maass
