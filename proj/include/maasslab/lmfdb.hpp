#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "maasslab/data_io.hpp"
#include "maasslab/errors.hpp"

#ifdef MAASSLAB_ENABLE_HTTP
#include <httplib.h>
#endif

namespace maass {

// Query selector: a catalog label, or a spectral-parameter range.
struct LmfdbSelector {
    std::optional<std::string> label;
    std::optional<std::pair<double, double>> r_range;

    std::string key() const {
        std::ostringstream os;
        if (label) os << "label=" << *label;
        if (r_range) {
            if (label) os << "&";
            os << "r=" << r_range->first << ".." << r_range->second;
        }
        return os.str();
    }
};

namespace detail {

// Upstream payloads carry Fourier coefficients a_n (n from 1); keep the prime
// entries, normalized so a_1 = 1 (Hecke normalization).
inline FormRecord record_from_payload(const nlohmann::json& item) {
    FormRecord rec;
    if (!item.contains("spectral_parameter") || !item.contains("symmetry") ||
        !item.contains("coefficients"))
        throw schema_drift_error(
            "lmfdb payload item lacks spectral_parameter/symmetry/coefficients");
    rec.label = item.value("label", std::string("unlabeled"));
    rec.r = item.at("spectral_parameter").get<double>();
    const auto& sym = item.at("symmetry");
    if (sym.is_number_integer()) {
        const int v = sym.get<int>();
        if (v == 0 || v == 1)
            rec.parity = v;
        else if (v == -1)
            rec.parity = 1;
        else
            throw schema_drift_error("lmfdb payload: unrecognized symmetry value");
    } else if (sym.is_string()) {
        const std::string v = sym.get<std::string>();
        if (v == "even")
            rec.parity = 0;
        else if (v == "odd")
            rec.parity = 1;
        else
            throw schema_drift_error("lmfdb payload: unrecognized symmetry string");
    } else {
        throw schema_drift_error("lmfdb payload: symmetry has unexpected type");
    }
    const auto& coeffs = item.at("coefficients");
    if (!coeffs.is_array() || coeffs.empty())
        throw schema_drift_error("lmfdb payload: coefficients not a non-empty array");
    const double a1 = coeffs.at(0).get<double>();
    if (!(a1 > 0))
        throw schema_drift_error("lmfdb payload: a_1 must be positive");
    if (a1 != 1.0) {
        std::ostringstream note;
        note << "normalized by a_1 = " << a1;
        rec.provenance = note.str();
    }
    for (std::size_t n = 2; n <= coeffs.size(); ++n) {
        if (is_prime(n)) {
            rec.eigs.emplace_back(static_cast<std::uint64_t>(n),
                                  coeffs.at(n - 1).get<double>() / a1);
        }
    }
    // trim to a gap-free prime prefix
    const auto full = primes_up_to(rec.eigs.empty() ? 0 : rec.eigs.back().first);
    if (full.size() != rec.eigs.size()) {
        std::size_t good = 0;
        while (good < rec.eigs.size() && good < full.size() &&
               rec.eigs[good].first == full[good])
            ++good;
        rec.eigs.resize(good);
    }
    rec.source = "lmfdb";
    return rec;
}

}  // namespace detail

// Minimal client for the public Maass-form API with an on-disk JSONL cache.
// The transport is pluggable so tests can serve canned payloads locally.
class LmfdbClient {
  public:
    // returns (http status, body); status 0 means transport failure
    using Transport = std::function<std::pair<int, std::string>(const std::string&)>;

    explicit LmfdbClient(std::filesystem::path cache_dir,
                         std::string base_url = "https://www.lmfdb.org",
                         Transport transport = nullptr)
        : cache_dir_(std::move(cache_dir)),
          base_url_(std::move(base_url)),
          transport_(std::move(transport)) {
        std::filesystem::create_directories(cache_dir_);
    }

    // Fetch records for the selector; identical repeated calls are served
    // from the cache without touching the network.
    std::vector<FormRecord> fetch(const LmfdbSelector& selector) {
        const std::string key = selector.key();
        const auto cache_file = cache_dir_ / (selector_hash(key) + ".jsonl");
        SingleFlight guard(*this, key);
        if (std::filesystem::exists(cache_file)) return load_dataset(cache_file);
        const std::string url = build_url(selector);
        const std::string body = get_with_retries(url);
        auto records = parse_payload(body);
        const auto now = std::chrono::system_clock::now();
        const auto secs =
            std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
                .count();
        for (auto& rec : records) {
            rec.fetched_at = std::to_string(secs);
            validate_record(rec);
        }
        save_dataset(records, cache_file);  // atomic write-then-rename
        return records;
    }

    std::string build_url(const LmfdbSelector& selector) const {
        std::ostringstream url;
        url << base_url_ << "/api/maass_rigor/?_format=json";
        if (selector.label) url << "&label=" << *selector.label;
        if (selector.r_range)
            url << "&spectral_parameter=ge" << selector.r_range->first
                << "&spectral_parameter=le" << selector.r_range->second;
        return url.str();
    }

    static std::vector<FormRecord> parse_payload(const std::string& body) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& ex) {
            throw schema_drift_error(std::string("lmfdb payload is not JSON: ") +
                                     ex.what());
        }
        if (!j.contains("data") || !j.at("data").is_array())
            throw schema_drift_error("lmfdb payload lacks a 'data' array");
        std::vector<FormRecord> records;
        for (const auto& item : j.at("data"))
            records.push_back(detail::record_from_payload(item));
        return records;
    }

  private:
    // Serializes concurrent fetches of the same selector.
    class SingleFlight {
      public:
        SingleFlight(LmfdbClient& client, std::string key)
            : client_(client), key_(std::move(key)) {
            std::unique_lock<std::mutex> lock(client_.flight_mutex_);
            client_.flight_cv_.wait(lock,
                                    [&] { return !client_.in_flight_.count(key_); });
            client_.in_flight_.insert(key_);
        }
        ~SingleFlight() {
            std::lock_guard<std::mutex> lock(client_.flight_mutex_);
            client_.in_flight_.erase(key_);
            client_.flight_cv_.notify_all();
        }

      private:
        LmfdbClient& client_;
        std::string key_;
    };

    std::pair<int, std::string> raw_get(const std::string& url) const {
        if (transport_) return transport_(url);
#ifdef MAASSLAB_ENABLE_HTTP
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos)
            throw network_error("lmfdb: malformed url " + url);
        const auto path_start = url.find('/', scheme_end + 3);
        const std::string origin = url.substr(0, path_start);
        const std::string path =
            path_start == std::string::npos ? "/" : url.substr(path_start);
        httplib::Client client(origin);
        client.set_connection_timeout(10);
        client.set_read_timeout(30);
        auto res = client.Get(path);
        if (!res) return {0, ""};
        return {res->status, res->body};
#else
        throw network_error("lmfdb: HTTP transport disabled in this build");
#endif
    }

    // exponential backoff on transport failures, 429 and 5xx
    std::string get_with_retries(const std::string& url) const {
        int backoff_ms = 250;
        for (int tries = 0;; ++tries) {
            auto [status, body] = raw_get(url);
            if (status == 200) return body;
            if (status != 0 && status != 429 && status < 500)
                throw network_error("lmfdb: HTTP " + std::to_string(status) + " for " +
                                    url);
            if (tries >= 2)
                throw network_error("lmfdb: giving up after retries on " + url);
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
    }

    std::filesystem::path cache_dir_;
    std::string base_url_;
    Transport transport_;
    std::mutex flight_mutex_;
    std::condition_variable flight_cv_;
    std::set<std::string> in_flight_;
};

}  // namespace maass
