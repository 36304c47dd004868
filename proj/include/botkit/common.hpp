#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace botkit {

// Error kinds map 1:1 onto CLI exit codes.
enum class errc : int { config = 1, data = 2, numeric = 3 };

class error : public std::runtime_error {
public:
    error(errc kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    errc kind() const { return kind_; }

private:
    errc kind_;
};

struct config_error : error {
    explicit config_error(const std::string& what) : error(errc::config, what) {}
};

struct data_error : error {
    explicit data_error(const std::string& what) : error(errc::data, what) {}
};

struct numeric_error : error {
    explicit numeric_error(const std::string& what) : error(errc::numeric, what) {}
};

// 64-bit FNV-1a. Used for input/output fingerprints in run manifests; not cryptographic.
uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(uint64_t h);
uint64_t hash_file(const std::string& path);

// Child seed for a named component. All randomness in the toolkit flows from one
// master seed through labels like "tree/7" or "cell/2/0", so results do not
// depend on scheduling or call order.
uint64_t derive_seed(uint64_t master, std::string_view label);

// Deterministic random source. Wraps mt19937_64 but exposes only hand-rolled
// distributions, so identical seeds give identical streams on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0,1) with 53 bits of resolution.
    double uniform01();

    // Uniform integer in [0, n). n must be > 0.
    uint64_t uniform_int(uint64_t n);

    bool bernoulli(double p) { return uniform01() < p; }

    // Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double normal();

    // scale * exp(sigma * z). Median equals scale.
    double lognormal(double scale, double sigma);

    // Fisher-Yates permutation of 0..n-1.
    std::vector<uint32_t> permutation(uint32_t n);

private:
    std::mt19937_64 engine_;
};

// Runs fn(i) for i in [0, n). With threads <= 1 this is a plain loop; otherwise a
// small worker pool claims indices from an atomic counter. Callers must write
// results into preallocated slots indexed by i so output is schedule-independent.
void parallel_for(size_t n, unsigned threads, const std::function<void(size_t)>& fn);

}  // namespace botkit
