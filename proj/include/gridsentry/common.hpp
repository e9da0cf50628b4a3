#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gridsentry {

// Error hierarchy. The CLI maps these onto stable exit codes:
// ValidationError (and subtypes) -> 2, IoError -> 3, ContractError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rejected input: bad configuration, violated precondition, invalid flag.
struct ValidationError : Error {
    using Error::Error;
};

// Malformed file content (cfg/dat/csv text that does not parse).
struct ParseError : ValidationError {
    using ValidationError::ValidationError;
};

// Structurally valid file whose payload is inconsistent or non-finite.
struct DataError : ValidationError {
    using ValidationError::ValidationError;
};

// Filesystem-level failure.
struct IoError : Error {
    using Error::Error;
};

// A runtime contract was broken (non-simplex probabilities, width mismatch
// between fitted model and data, ...).
struct ContractError : Error {
    using Error::Error;
};

// Deterministic 64-bit generator (splitmix64 core, Box-Muller normals).
// Identical seeds give identical draw sequences on every platform, which the
// reproducibility guarantees of the dataset generator and the model fitters
// rely on. fork() derives an independent child stream without touching the
// parent state, so per-tree / per-record streams stay stable no matter the
// order they are consumed in.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64();
    double next_double();  // uniform in [0, 1)
    double next_normal();  // standard normal
    std::uint64_t next_below(std::uint64_t n);

    Rng fork(std::uint64_t stream) const;

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Worker count for internal parallelism: GRIDSENTRY_THREADS if set, else the
// hardware concurrency. Always >= 1.
int thread_budget();

// Runs fn over [0, n) in contiguous chunks, one per worker. Results must be
// written to disjoint output slots so the outcome is independent of the
// number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// FNV-1a content hashing, used by the run manifest.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Shortest decimal form that round-trips the exact double (std::to_chars).
std::string format_double(double value);

}  // namespace gridsentry
