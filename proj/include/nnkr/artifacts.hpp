#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "nnkr/certificates.hpp"
#include "nnkr/diagnostics.hpp"
#include "nnkr/experiments.hpp"

// Serialization of results. CSV files use '.' decimals, LF line endings, a
// mandatory header row and the shortest round-trip form of every double, so
// equal inputs give byte-identical files. See docs/FORMATS.md.

namespace nnkr {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form ("nan", "inf", "-inf" for non-finite).
std::string format_double(double v);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& data);

/// Writes bytes verbatim (binary mode). Throws InputError on failure.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Header: n,s,trial,seed,success,error_l2,residual,iterations,N,kkt,converged
std::string phase_csv(const PhaseDiagram& diagram);
/// Header: n,s,trial,seed,success,error_l2,residual,iterations,N,scale,e_frob,bound,kkt,converged
std::string noise_csv(const NoiseReport& report);
/// Header: M,trial,seed,error_l2,relative_error,recall,precision,residual,iterations,converged
std::string covmatch_csv(const CovmatchReport& report);

Json to_json(const PhaseDiagram& diagram);
Json to_json(const NoiseReport& report);
Json to_json(const CovmatchReport& report);
Json to_json(const ConstantChain& chain);
Json to_json(const RipEstimate& est);
Json to_json(const NspCheckReport& report);
Json to_json(const TailCheckReport& report);
Json to_json(const SolverConfig& cfg);

struct ArtifactRef {
    std::string path;
    std::string digest;  // fnv1a_hex of the file bytes
};

struct RunManifest {
    std::string command;
    std::string config_digest;  // fnv1a_hex of Config::canonical()
    std::uint64_t base_seed = 0;
    std::vector<ArtifactRef> artifacts;
    std::string version = NNKR_VERSION;
    std::string timestamp;  // UTC, ISO 8601

    /// fnv1a_hex over command, config digest, seed and version. Reruns with
    /// equal inputs share it; the timestamp is excluded.
    std::string run_id() const;
    Json to_json() const;
};

/// UTC now, or SOURCE_DATE_EPOCH when that variable is set.
std::string utc_timestamp();

}  // namespace nnkr
