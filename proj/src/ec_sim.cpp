#include "qkd/ec_sim.hpp"
#include "qkd/csv.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qkd {

std::int64_t Philox4x32::poisson(double mu)
{
    if (!(mu >= 0.0) || mu > 700.0)
        throw std::domain_error("poisson: mean outside [0, 700]");
    if (mu == 0.0)
        return 0;
    double p = std::exp(-mu), F = p, u = uniform();
    std::int64_t k = 0;
    while (u > F && k < 5000) {
        ++k;
        p *= mu / static_cast<double>(k);
        F += p;
    }
    return k;
}

namespace {

// detector id = 2*basis + bit
int landing_detector(Philox4x32& rng, int basis, int bit)
{
    double u = rng.uniform();
    double acc = 0.0;
    for (int c = 0; c < 4; ++c) {
        acc += kLandingShare[c];
        if (u < acc) {
            switch (c) {
            case 0:
                return 2 * basis + bit;
            case 1:
                return 2 * basis + (1 - bit);
            case 2:
                return 2 * (1 - basis);
            default:
                return 2 * (1 - basis) + 1;
            }
        }
    }
    return 2 * (1 - basis) + 1;
}

int random_set_bit(Philox4x32& rng, unsigned mask)
{
    int cnt = std::popcount(mask);
    auto pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(cnt)));
    for (int d = 0; d < 4; ++d)
        if (mask & (1u << d))
            if (pick-- == 0)
                return d;
    return -1;
}

} // namespace

SimResult simulate_transmission(const ChannelParams& p, std::uint64_t seed, const SimOptions& opt)
{
    p.validate();
    if (p.m > 1e8)
        throw std::domain_error("simulate_transmission: m above 1e8");
    Philox4x32 rng(seed, 0);
    SimResult r;
    auto m = static_cast<std::uint64_t>(p.m);
    for (std::uint64_t i = 0; i < m; ++i) {
        std::uint32_t coin = rng();
        int ab = coin & 1u, av = (coin >> 1) & 1u;
        std::int64_t l = rng.poisson(p.mu);
        std::int64_t arrived = 0;
        unsigned photon_mask = 0;
        for (std::int64_t j = 0; j < l; ++j) {
            if (!rng.bernoulli(p.alpha))
                continue;
            ++arrived;
            if (rng.bernoulli(p.eta))
                photon_mask |= 1u << landing_detector(rng, ab, av);
        }
        bool dark = rng.bernoulli(p.r_d);
        unsigned dark_mask = dark ? 1u << rng.below(4) : 0u;
        unsigned mask = photon_mask | dark_mask;

        PulseRecord rec;
        if (opt.keep_records) {
            rec.index = i;
            rec.alice_basis = static_cast<std::uint8_t>(ab);
            rec.alice_bit = static_cast<std::uint8_t>(av);
            rec.photons_emitted = static_cast<std::int32_t>(l);
            rec.photons_arrived = static_cast<std::int32_t>(arrived);
            rec.detector_clicks = static_cast<std::uint8_t>(mask);
            rec.dark_count = dark;
        }
        int det = -1;
        if (mask != 0) {
            if (opt.mcs)
                det = std::popcount(mask) == 1 ? std::countr_zero(mask) : -1;
            else
                det = random_set_bit(rng, mask);
        }
        if (det >= 0) {
            int bb = det >> 1, bv = det & 1;
            if ((photon_mask & (1u << det)) && rng.bernoulli(p.r_c))
                bv ^= 1;
            if (opt.keep_records) {
                rec.bob_basis = static_cast<std::uint8_t>(bb);
                rec.bob_bit = static_cast<std::uint8_t>(bv);
            }
            if (bb == ab) {
                r.n_emp += 1.0;
                if (bv != av)
                    r.e_emp += 1.0;
                if (opt.keep_sifted) {
                    r.alice_sifted.push_back(static_cast<std::uint8_t>(av));
                    r.bob_sifted.push_back(static_cast<std::uint8_t>(bv));
                    r.compatible_idx.push_back(i);
                }
            } else if (opt.keep_sifted) {
                r.incompatible_idx.push_back(i);
            }
        }
        if (opt.keep_records)
            r.records.push_back(rec);
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

void shuffle(std::vector<std::size_t>& v, Philox4x32& rng)
{
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.below(i)]);
}

int parity_of(const Bits& s, const std::size_t* idx, std::size_t len)
{
    int p = 0;
    for (std::size_t i = 0; i < len; ++i)
        p ^= s[idx[i]];
    return p;
}

// Locates one odd-parity position; every halving discloses one parity bit.
std::size_t bisect(const Bits& a, const Bits& b, const std::size_t* idx, std::size_t len,
                   double& disclosed)
{
    while (len > 1) {
        std::size_t half = len / 2;
        disclosed += 1.0;
        if (parity_of(a, idx, half) != parity_of(b, idx, half)) {
            len = half;
        } else {
            idx += half;
            len -= half;
        }
    }
    return idx[0];
}

} // namespace

ECRun run_error_correction(const Bits& alice, const Bits& bob, const ECParams& p,
                           std::uint64_t seed)
{
    if (alice.size() != bob.size())
        throw std::invalid_argument("run_error_correction: length mismatch");
    ECParams q = p;
    q.n = static_cast<double>(alice.size());
    q.validate();
    const std::size_t n = alice.size();
    const double beta = ec_beta(q.rho);
    Philox4x32 rng(seed, 1); // shared by both parties

    ECRun r;
    r.bob_corrected = bob;
    Bits& B = r.bob_corrected;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    // iterated block parities with bisective correction
    double e_est = q.e_T0;
    while (e_est > 2.0 * q.rho) {
        shuffle(perm, rng);
        auto J = static_cast<std::size_t>(std::ceil(e_est / q.rho));
        J = std::min(J, n);
        for (std::size_t blk = 0; blk < J; ++blk) {
            std::size_t lo = blk * n / J, hi = (blk + 1) * n / J;
            r.parity_bits += 1.0;
            if (parity_of(alice, &perm[lo], hi - lo) != parity_of(B, &perm[lo], hi - lo)) {
                std::size_t pos = bisect(alice, B, &perm[lo], hi - lo, r.parity_bits);
                B[pos] ^= 1;
                ++r.corrected;
            }
        }
        ++r.N1_obs;
        e_est *= beta;
    }

    // validation on random halves until N2 clean checks in a row
    const std::size_t half = n / 2;
    int streak = 0;
    while (streak < static_cast<int>(q.N2)) {
        // partial Fisher-Yates picks the subset
        for (std::size_t i = 0; i < half; ++i)
            std::swap(perm[i], perm[i + rng.below(n - i)]);
        r.parity_bits += 1.0;
        if (parity_of(alice, perm.data(), half) == parity_of(B, perm.data(), half)) {
            ++streak;
            ++r.N2n_obs;
        } else {
            std::size_t pos = bisect(alice, B, perm.data(), half, r.parity_bits);
            B[pos] ^= 1;
            ++r.corrected;
            ++r.N2f_obs;
            streak = 0;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        r.residual_errors += alice[i] != B[i];
    return r;
}

// ---------------------------------------------------------------------------

std::size_t wc_key_length(unsigned g, std::size_t c)
{
    return static_cast<std::size_t>(std::ceil(wegman_carter_w(g, static_cast<double>(c))));
}

unsigned wc_block_width(unsigned g, std::size_t c)
{
    if (c < 4)
        throw std::domain_error("wc_block_width: message shorter than 4 bits");
    return g + static_cast<unsigned>(std::ceil(std::log2(std::log2(static_cast<double>(c))) - 1e-12));
}

namespace {
using u128 = unsigned __int128;

u128 read_bits(const Bits& s, std::size_t off, unsigned len)
{
    u128 v = 0;
    for (unsigned i = 0; i < len; ++i)
        if (off + i < s.size() && s[off + i])
            v |= u128{1} << i;
    return v;
}
} // namespace

// Multiply-shift reduction of 2s-bit blocks to s bits, one odd multiplier per
// tree level taken from consecutive 2s-bit slices of the key.
Bits wc_auth_tag(const Bits& message, const Bits& key, unsigned g)
{
    const std::size_t c = message.size();
    const unsigned s = wc_block_width(g, c);
    if (key.size() != wc_key_length(g, c))
        throw std::invalid_argument("wc_auth_tag: key length does not match w(g, c)");
    if (2 * s > 128)
        throw std::domain_error("wc_auth_tag: tag too long for 128-bit blocks");
    const unsigned w = 2 * s;
    const u128 mask = w == 128 ? ~u128{0} : (u128{1} << w) - 1;

    Bits cur = message;
    std::size_t level = 0;
    while (cur.size() > s) {
        std::size_t off = level * w;
        if (off + w > key.size())
            throw std::logic_error("wc_auth_tag: key exhausted");
        u128 a = read_bits(key, off, w) | 1u;
        Bits next;
        next.reserve((cur.size() + w - 1) / w * s);
        for (std::size_t b = 0; b < cur.size(); b += w) {
            u128 x = read_bits(cur, b, w);
            u128 h = ((a * x) & mask) >> s;
            for (unsigned i = 0; i < s; ++i)
                next.push_back(static_cast<std::uint8_t>((h >> i) & 1u));
        }
        cur.swap(next);
        ++level;
    }
    Bits tag(g, 0);
    for (unsigned i = 0; i < g && i < cur.size(); ++i)
        tag[i] = cur[i];
    return tag;
}

std::vector<std::uint32_t> affine_product(const std::vector<std::uint32_t>& x,
                                          const std::vector<std::uint32_t>& M,
                                          const std::vector<std::uint32_t>& P)
{
    const std::size_t N = x.size();
    if (M.size() != N || P.size() != N)
        throw std::invalid_argument("affine_product: M and P must match the input length");
    std::vector<std::uint32_t> r(2 * N + 1, 0);
    for (std::size_t i = 0; i < N; ++i) {
        std::uint64_t carry = 0;
        for (std::size_t j = 0; j < N; ++j) {
            std::uint64_t t = static_cast<std::uint64_t>(M[i]) * x[j] + r[i + j] + carry;
            r[i + j] = static_cast<std::uint32_t>(t);
            carry = t >> 32;
        }
        r[i + N] = static_cast<std::uint32_t>(carry);
    }
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < 2 * N + 1; ++i) {
        std::uint64_t t = static_cast<std::uint64_t>(r[i]) + (i < N ? P[i] : 0u) + carry;
        r[i] = static_cast<std::uint32_t>(t);
        carry = t >> 32;
        if (i >= N && carry == 0)
            break;
    }
    return r;
}

std::vector<std::uint32_t> cw_affine_pa_hash(const std::vector<std::uint32_t>& input,
                                             const std::vector<std::uint32_t>& M,
                                             const std::vector<std::uint32_t>& P,
                                             std::size_t out_bits)
{
    if (out_bits > input.size() * 32)
        throw std::domain_error("cw_affine_pa_hash: out_bits exceeds input length");
    auto full = affine_product(input, M, P);
    std::size_t words = (out_bits + 31) / 32;
    std::vector<std::uint32_t> out(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(words));
    if (out_bits % 32 != 0)
        out.back() &= (1u << (out_bits % 32)) - 1u;
    return out;
}

std::vector<std::uint32_t> pack_words(const Bits& bits)
{
    std::vector<std::uint32_t> w((bits.size() + 31) / 32, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i])
            w[i / 32] |= 1u << (i % 32);
    return w;
}

Bits unpack_words(const std::vector<std::uint32_t>& words, std::size_t nbits)
{
    Bits b(nbits, 0);
    for (std::size_t i = 0; i < nbits && i / 32 < words.size(); ++i)
        b[i] = (words[i / 32] >> (i % 32)) & 1u;
    return b;
}

Bits derive_pa_key_from_sift(const SimResult& sim, SiftSource src)
{
    const auto& idx = src == SiftSource::compatible ? sim.compatible_idx : sim.incompatible_idx;
    Bits out;
    out.reserve(idx.size());
    for (std::uint64_t i : idx)
        out.push_back(static_cast<std::uint8_t>(std::popcount(i) & 1));
    return out;
}

void write_trace_csv(std::ostream& os, const std::vector<TrialTrace>& rows)
{
    os << "trial,n_emp,e_emp,parity_bits,N1_obs,N2n_obs,N2f_obs,residual\n";
    for (const auto& t : rows)
        os << t.trial << ',' << fmt9(t.n_emp) << ',' << fmt9(t.e_emp) << ','
           << fmt9(t.parity_bits) << ',' << t.N1_obs << ',' << t.N2n_obs << ',' << t.N2f_obs
           << ',' << t.residual << '\n';
}

} // namespace qkd
