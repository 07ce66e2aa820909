#pragma once

#include "loads.hpp"
#include "sift_model.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

namespace qkd {

// Philox4x32-10 counter-based generator. Stream s of seed k uses key k and
// the counter's upper words, so trials never overlap.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t seed = 0, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)}
    {
    }

    static Block bijection(Block c, Key k)
    {
        constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
        constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
        for (int r = 0; r < 10; ++r) {
            std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
            std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
            k[0] += W0;
            k[1] += W1;
        }
        return c;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        if (pos_ == 4) {
            buf_ = bijection(ctr_, key_);
            if (++ctr_[0] == 0)
                ++ctr_[1];
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    std::uint64_t next64()
    {
        std::uint64_t hi = (*this)();
        return (hi << 32) | (*this)();
    }

    // [0,1) with 53 random bits
    double uniform() { return static_cast<double>(next64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform() < p); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n)
    {
        if (n == 0)
            return 0;
        std::uint64_t lim = std::numeric_limits<std::uint64_t>::max() -
                            std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do
            x = next64();
        while (x >= lim);
        return x % n;
    }

    // inversion; fine for the small means used here
    std::int64_t poisson(double mu);

private:
    Key key_;
    Block ctr_;
    Block buf_{};
    int pos_ = 4;
};

using Bits = std::vector<std::uint8_t>; // one bit per element, values 0/1

// ---------------------------------------------------------------------------
// quantum channel

struct PulseRecord {
    std::uint64_t index = 0;
    std::uint8_t alice_basis = 0, alice_bit = 0;
    std::int32_t photons_emitted = 0;
    std::int32_t photons_arrived = 0;
    std::uint8_t detector_clicks = 0; // bit 2*basis+bit set when that detector fired
    bool dark_count = false;
    std::optional<std::uint8_t> bob_basis, bob_bit;
};

struct SimOptions {
    bool mcs = false;
    bool keep_records = false;
    bool keep_sifted = true;
};

struct SimResult {
    double n_emp = 0; // sifted bits
    double e_emp = 0; // sifted errors
    std::vector<PulseRecord> records;
    Bits alice_sifted, bob_sifted;
    // indices of clicked cells whose bases matched / did not
    std::vector<std::uint64_t> compatible_idx, incompatible_idx;
};

SimResult simulate_transmission(const ChannelParams& p, std::uint64_t seed,
                                const SimOptions& opt = {});

// ---------------------------------------------------------------------------
// reconciliation

struct ECRun {
    Bits bob_corrected;
    double parity_bits = 0;
    int N1_obs = 0;
    int N2n_obs = 0;
    int N2f_obs = 0;
    int corrected = 0;
    int residual_errors = 0;
};

// e_T0 in p is the parties' estimate of the initial error count.
ECRun run_error_correction(const Bits& alice, const Bits& bob, const ECParams& p,
                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// hashing

// Key bits needed for a g-bit tag on a c-bit message: ceil(w(g, c)).
std::size_t wc_key_length(unsigned g, std::size_t c);
// Width of the tree hash blocks, s = g + ceil(log2 log2 c).
unsigned wc_block_width(unsigned g, std::size_t c);

Bits wc_auth_tag(const Bits& message, const Bits& key, unsigned g);

// Low out_bits of M*x + P over N 32-bit little-endian words.
std::vector<std::uint32_t> cw_affine_pa_hash(const std::vector<std::uint32_t>& input,
                                             const std::vector<std::uint32_t>& M,
                                             const std::vector<std::uint32_t>& P,
                                             std::size_t out_bits);

// Full 2N+1 word value of M*x + P.
std::vector<std::uint32_t> affine_product(const std::vector<std::uint32_t>& input,
                                          const std::vector<std::uint32_t>& M,
                                          const std::vector<std::uint32_t>& P);

std::vector<std::uint32_t> pack_words(const Bits& bits);
Bits unpack_words(const std::vector<std::uint32_t>& words, std::size_t nbits);

enum class SiftSource { compatible, incompatible };

// Parity of each event index, in event order. Costs no classical traffic.
Bits derive_pa_key_from_sift(const SimResult& sim, SiftSource src);

// ---------------------------------------------------------------------------
// trial traces

struct TrialTrace {
    std::uint64_t trial = 0;
    double n_emp = 0, e_emp = 0, parity_bits = 0;
    int N1_obs = 0, N2n_obs = 0, N2f_obs = 0, residual = 0;
};

void write_trace_csv(std::ostream& os, const std::vector<TrialTrace>& rows);

} // namespace qkd
