#include <gtest/gtest.h>

#include <bit>
#include <numbers>
#include <random>

#include "cmwave/numerics.hpp"
#include "cmwave/waveform.hpp"

using namespace cmwave;

namespace {

constexpr double kPi = std::numbers::pi;

BitVec random_bits(std::mt19937_64& rng, std::size_t n) {
    BitVec b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng() & 1u);
    return b;
}

/**
 * Independent route for the transmit chain: build the full matrix product
 * diag(chirp) * F_N^H * [diag(c2)] * P_u * [F_M] from numerics primitives and
 * apply it to the symbol vector.
 */
Signal matrix_chain_modulate(const SystemConfig& cfg, std::size_t u, std::size_t nu,
                             const std::vector<std::size_t>& syms, ChirpDirection dir) {
    ComplexMatrix chain = mapping_matrix(cfg, u);  // N x M
    if (is_afdm_family(cfg.waveform)) {
        ComplexMatrix c2 = ComplexMatrix::identity(cfg.N);
        for (std::size_t n = 0; n < cfg.N; ++n) {
            const double nn = static_cast<double>(n);
            c2(n, n) = std::polar(1.0, 2.0 * kPi * cfg.afdm_c2 * nn * nn);
        }
        chain = c2 * chain;
    }
    if (uses_dft_spreading(cfg.waveform)) chain = chain * dft_matrix(cfg.M, false);
    chain = dft_matrix(cfg.N, true) * chain;

    Signal chirp(cfg.N, cplx{1.0, 0.0});
    if (cfg.waveform == Waveform::ChirpedDftSOfdm) {
        chirp = chirp_modulate(generate_chirp(cfg.N, cfg.chirp_rate, dir), cfg.chirped_shift);
    } else if (cfg.waveform == Waveform::DftSOfdmCm) {
        chirp = chirp_modulate(generate_chirp(cfg.N, cfg.chirp_rate, dir), nu);
    } else if (is_afdm_family(cfg.waveform)) {
        chirp = chirp_modulate(generate_chirp(cfg.N, 2.0 * cfg.afdm_c1, ChirpDirection::Up),
                               nu);
    }
    ComplexMatrix full(cfg.N, cfg.M);
    for (std::size_t r = 0; r < cfg.N; ++r)
        for (std::size_t c = 0; c < cfg.M; ++c) full(r, c) = chirp[r] * chain(r, c);

    const auto table = psk_symbol_table(cfg.Q);
    std::vector<cplx> x(cfg.M);
    for (std::size_t m = 0; m < cfg.M; ++m) x[m] = table[syms[m]];
    return full.apply(x);
}

double max_abs_diff(const Signal& a, const Signal& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(SplitBits, SplitsByDeclaredLengths) {
    const auto cfg = make_config(Waveform::DftSOfdmCm, 8, 2, 1, 2, 4, 2);
    const auto msg = split_bits({0, 1, 1, 0}, cfg);
    EXPECT_EQ(msg.chirp_bits, (BitVec{0, 1}));
    EXPECT_EQ(msg.symbol_bits, (BitVec{1, 0}));
    EXPECT_FALSE(msg.direction_bit.has_value());
}

TEST(SplitBits, NoChirpBitsWhenPIsOne) {
    const auto cfg = make_config(Waveform::DftSOfdmCm, 8, 2, 1, 2, 1, 2);
    const auto msg = split_bits({1, 0}, cfg);
    EXPECT_TRUE(msg.chirp_bits.empty());
    EXPECT_EQ(msg.symbol_bits, (BitVec{1, 0}));
}

TEST(SplitBits, SingleSymbolQpsk) {
    const auto cfg = make_config(Waveform::DftSOfdmCm, 8, 1, 1, 4, 2, 2);
    const auto msg = split_bits({1, 0, 1}, cfg);
    EXPECT_EQ(msg.chirp_bits, (BitVec{1}));
    EXPECT_EQ(msg.symbol_bits, (BitVec{0, 1}));
}

TEST(SplitBits, DirectionBitComesFirstInCombinedMode) {
    auto cfg = make_config(Waveform::DftSOfdmCm, 8, 2, 1, 2, 2, 2);
    cfg.chirp_direction = ChirpDirection::Combined;
    const auto msg = split_bits({1, 0, 1, 1}, cfg);
    ASSERT_TRUE(msg.direction_bit.has_value());
    EXPECT_EQ(*msg.direction_bit, 1);
    EXPECT_EQ(msg.chirp_bits, (BitVec{0}));
    EXPECT_EQ(msg.symbol_bits, (BitVec{1, 1}));
}

TEST(SplitBits, WrongLengthRejected) {
    const auto cfg = make_config(Waveform::DftSOfdmCm, 8, 2, 1, 2, 4, 2);
    EXPECT_THROW(split_bits({0, 1, 1}, cfg), std::invalid_argument);
}

TEST(ChirpIndex, NaturalBinaryMsbFirst) {
    EXPECT_EQ(chirp_index({0, 0}), 0u);
    EXPECT_EQ(chirp_index({0, 1}), 1u);
    EXPECT_EQ(chirp_index({1, 0}), 2u);
    EXPECT_EQ(chirp_index({1, 1}), 3u);
    EXPECT_EQ(chirp_index({}), 0u);
}

TEST(GenerateChirp, StartsAtOneAndStaysUnitModulus) {
    const auto c = generate_chirp(16, 1.0 / 16.0, ChirpDirection::Up);
    EXPECT_NEAR(std::abs(c[0] - cplx{1.0, 0.0}), 0.0, 1e-15);
    for (const auto& v : c) EXPECT_NEAR(std::abs(v), 1.0, 1e-12);
}

TEST(GenerateChirp, QuarterTurnSampleAtN8) {
    const auto up = generate_chirp(8, 1.0 / 8.0, ChirpDirection::Up);
    EXPECT_NEAR(std::abs(up[2] - cplx{0.0, 1.0}), 0.0, 1e-12);
    const auto down = generate_chirp(8, 1.0 / 8.0, ChirpDirection::Down);
    EXPECT_NEAR(std::abs(down[2] - cplx{0.0, -1.0}), 0.0, 1e-12);
}

TEST(ChirpModulate, ZeroAndFullRotationAreIdentity) {
    const auto c = generate_chirp(8, 1.0 / 8.0, ChirpDirection::Up);
    EXPECT_EQ(chirp_modulate(c, 0), c);
    EXPECT_EQ(chirp_modulate(c, 8), c);
}

TEST(ChirpModulate, ShiftTwoStartsAtJ) {
    const auto c = generate_chirp(8, 1.0 / 8.0, ChirpDirection::Up);
    const auto shifted = chirp_modulate(c, 2);
    EXPECT_NEAR(std::abs(shifted[0] - cplx{0.0, 1.0}), 0.0, 1e-12);
}

TEST(ChirpModulate, ShiftsCompose) {
    const auto c = generate_chirp(8, 1.0 / 8.0, ChirpDirection::Up);
    for (std::size_t a = 0; a < 8; ++a) {
        for (std::size_t b = 0; b < 8; ++b) {
            EXPECT_EQ(chirp_modulate(chirp_modulate(c, a), b), chirp_modulate(c, (a + b) % 8));
        }
    }
}

TEST(ChirpModulate, OutOfRangeRejected) {
    const auto c = generate_chirp(8, 1.0 / 8.0, ChirpDirection::Up);
    EXPECT_THROW(chirp_modulate(c, 9), std::invalid_argument);
}

TEST(MappingMatrix, FullAllocationIsIdentity) {
    const auto cfg = make_config(Waveform::DftSOfdm, 8, 8, 1, 2, 1, 2);
    const auto p = mapping_matrix(cfg, 0);
    EXPECT_LT(p.max_abs_diff(ComplexMatrix::identity(8)), 1e-15);
}

TEST(MappingMatrix, InterleavedStride) {
    const auto cfg = make_config(Waveform::DftSOfdm, 8, 2, 2, 2, 1, 2);
    const auto p1 = mapping_matrix(cfg, 0);  // I_1 = 1 -> subcarriers {1, 5} 1-based
    EXPECT_EQ(p1(0, 0), (cplx{1, 0}));
    EXPECT_EQ(p1(4, 1), (cplx{1, 0}));
    // Columns are orthonormal: P^T P = I.
    const auto gram = p1.adjoint() * p1;
    EXPECT_EQ(gram.max_abs_diff(ComplexMatrix::identity(2)), 0.0);
    // Different users are column-disjoint.
    const auto p2 = mapping_matrix(cfg, 1);
    const auto cross = p1.adjoint() * p2;
    EXPECT_EQ(cross.max_abs_diff(ComplexMatrix(2, 2)), 0.0);
}

TEST(PskTables, FrozenMappings) {
    const auto bpsk = psk_symbol_table(2);
    EXPECT_NEAR(std::abs(bpsk[0] - cplx{1.0, 0.0}), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(bpsk[1] - cplx{-1.0, 0.0}), 0.0, 1e-12);

    // Gray QPSK at odd multiples of pi/4: 00, 01, 11, 10 walk the circle.
    const auto qpsk = psk_symbol_table(4);
    EXPECT_NEAR(std::abs(qpsk[0b00] - std::polar(1.0, kPi / 4.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(qpsk[0b01] - std::polar(1.0, 3.0 * kPi / 4.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(qpsk[0b11] - std::polar(1.0, 5.0 * kPi / 4.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(qpsk[0b10] - std::polar(1.0, 7.0 * kPi / 4.0)), 0.0, 1e-12);

    // Gray 8-PSK at multiples of pi/4.
    const auto epsk = psk_symbol_table(8);
    const std::size_t gray_order[8] = {0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100};
    for (std::size_t k = 0; k < 8; ++k) {
        EXPECT_NEAR(std::abs(epsk[gray_order[k]] -
                             std::polar(1.0, kPi / 4.0 * static_cast<double>(k))),
                    0.0, 1e-12)
            << "gray position " << k;
    }
    for (const auto& v : epsk) EXPECT_NEAR(std::abs(v), 1.0, 1e-12);
}

TEST(PskTables, AdjacentGrayWordsDifferInOneBit) {
    for (const std::size_t q : {4u, 8u, 16u}) {
        const auto table = psk_symbol_table(q);
        // Recover each bit word's position on the circle, then check that
        // neighbors differ in exactly one bit.
        std::vector<std::size_t> by_angle(q);
        const double offset = q == 4 ? kPi / 4.0 : 0.0;
        for (std::size_t b = 0; b < q; ++b) {
            double ang = std::arg(table[b]) - offset;
            while (ang < -1e-9) ang += 2.0 * kPi;
            const auto k = static_cast<std::size_t>(
                               std::llround(ang * static_cast<double>(q) / (2.0 * kPi))) %
                           q;
            by_angle[k] = b;
        }
        for (std::size_t k = 0; k < q; ++k) {
            const std::size_t a = by_angle[k];
            const std::size_t b = by_angle[(k + 1) % q];
            EXPECT_EQ(std::popcount(a ^ b), 1) << "q=" << q << " k=" << k;
        }
    }
}

TEST(PskMap, RejectsBadInput) {
    EXPECT_THROW(psk_map({0, 1}, 3), std::invalid_argument);
    EXPECT_THROW(psk_map({0, 1, 0}, 4), std::invalid_argument);
}

TEST(Modulate, ChirpBitsZeroEqualsChirpedWaveform) {
    const auto cm = make_config(Waveform::DftSOfdmCm, 8, 2, 4, 2, 4, 2);
    const auto chirped = make_config(Waveform::ChirpedDftSOfdm, 8, 2, 4, 2, 1, 2);
    for (std::size_t u = 0; u < 4; ++u) {
        UserMessage m_cm;
        m_cm.chirp_bits = {0, 0};
        m_cm.symbol_bits = {1, 0};
        UserMessage m_ch;
        m_ch.symbol_bits = {1, 0};
        EXPECT_EQ(modulate(cm, m_cm, u), modulate(chirped, m_ch, u));
    }
}

TEST(Modulate, UnitChirpReducesToPlainDftSOfdm) {
    auto cm = make_config(Waveform::DftSOfdmCm, 8, 2, 1, 2, 1, 2);
    cm.chirp_rate = 0.0;
    const auto plain = make_config(Waveform::DftSOfdm, 8, 2, 1, 2, 1, 2);
    UserMessage msg;
    msg.symbol_bits = {0, 1};
    const auto a = modulate(cm, msg, 0);
    const auto b = modulate(plain, msg, 0);
    EXPECT_LT(max_abs_diff(a, b), 1e-15);
}

TEST(Modulate, ConstantEnvelopeUnderInterleavedPskMapping) {
    const auto cfg = make_config(Waveform::DftSOfdmCm, 8, 2, 4, 2, 4, 2);
    for (std::size_t nu = 0; nu < 4; ++nu) {
        for (std::size_t s = 0; s < 4; ++s) {
            const auto sig =
                modulate_indices(cfg, 1, nu, {s / 2, s % 2}, ChirpDirection::Up);
            const double expected = std::abs(sig[0]);
            for (const auto& v : sig) EXPECT_NEAR(std::abs(v), expected, 1e-12);
        }
    }
}

TEST(Modulate, MagnitudeProfileIndependentOfChirpIndex) {
    const auto cfg = make_config(Waveform::DftSOfdmCm, 16, 4, 2, 4, 8, 2);
    std::mt19937_64 rng(5);
    const std::vector<std::size_t> syms{1, 3, 0, 2};
    const auto ref = modulate_indices(cfg, 0, 0, syms, ChirpDirection::Up);
    for (std::size_t nu = 1; nu < 8; ++nu) {
        const auto sig = modulate_indices(cfg, 0, nu, syms, ChirpDirection::Up);
        for (std::size_t n = 0; n < sig.size(); ++n) {
            EXPECT_NEAR(std::abs(sig[n]), std::abs(ref[n]), 1e-12);
        }
    }
}

TEST(Modulate, EnergyConservedForEveryWaveform) {
    std::mt19937_64 rng(17);
    struct Case {
        Waveform w;
        std::size_t n, m, u, q, p;
    };
    const Case cases[] = {
        {Waveform::DftSOfdm, 8, 2, 4, 2, 1},  {Waveform::ChirpedDftSOfdm, 8, 2, 4, 2, 1},
        {Waveform::DftSOfdmCm, 8, 2, 4, 2, 2}, {Waveform::Ofdm, 4, 1, 4, 8, 1},
        {Waveform::Afdm, 4, 1, 4, 8, 1},       {Waveform::AfdmCm, 4, 1, 4, 4, 2},
        {Waveform::DftSOfdmCm, 16, 4, 2, 8, 4},
    };
    for (const auto& c : cases) {
        auto cfg = make_config(c.w, c.n, c.m, c.u, c.q, c.p, 2);
        if (is_afdm_family(c.w)) cfg.afdm_c1 = 3.0 / (2.0 * static_cast<double>(c.n));
        for (int rep = 0; rep < 5; ++rep) {
            const std::size_t u = rng() % c.u;
            const BitVec bits = random_bits(rng, cfg.bits_per_user());
            const auto sig = modulate(cfg, split_bits(bits, cfg), u);
            EXPECT_NEAR(energy(sig), static_cast<double>(c.m), 1e-10)
                << waveform_name(c.w);
        }
    }
}

TEST(Modulate, MatchesExplicitMatrixChain) {
    // Dual-route check: per-stage transforms vs the assembled matrix product.
    std::mt19937_64 rng(23);
    struct Case {
        Waveform w;
        std::size_t n, m, u, q, p;
    };
    const Case cases[] = {
        {Waveform::DftSOfdm, 8, 2, 4, 2, 1},   {Waveform::ChirpedDftSOfdm, 8, 2, 4, 2, 1},
        {Waveform::DftSOfdmCm, 8, 2, 4, 2, 4}, {Waveform::Ofdm, 4, 1, 4, 8, 1},
        {Waveform::Afdm, 4, 1, 4, 8, 1},       {Waveform::AfdmCm, 4, 1, 4, 4, 2},
        {Waveform::DftSOfdmCm, 16, 2, 2, 4, 8},
    };
    for (const auto& c : cases) {
        auto cfg = make_config(c.w, c.n, c.m, c.u, c.q, c.p, 2);
        if (is_afdm_family(c.w)) {
            cfg.afdm_c1 = 3.0 / (2.0 * static_cast<double>(c.n));
            cfg.afdm_c2 = 0.013;
        }
        if (c.w == Waveform::ChirpedDftSOfdm) cfg.chirped_shift = 3;
        for (int rep = 0; rep < 4; ++rep) {
            const std::size_t u = rng() % c.u;
            const std::size_t nu = c.p > 1 ? rng() % c.p : 0;
            std::vector<std::size_t> syms(c.m);
            for (auto& s : syms) s = rng() % c.q;
            const auto fast = modulate_indices(cfg, u, nu, syms, ChirpDirection::Up);
            const auto slow = matrix_chain_modulate(cfg, u, nu, syms, ChirpDirection::Up);
            EXPECT_LT(max_abs_diff(fast, slow), 1e-9) << waveform_name(c.w);
        }
    }
}

TEST(CyclicPrefix, DefinitionAndRoundTrip) {
    const Signal s{{1, 0}, {2, 0}, {3, 0}, {4, 0}};
    const auto with0 = add_cp(s, 0);
    EXPECT_EQ(with0, s);
    const auto with1 = add_cp(s, 1);
    ASSERT_EQ(with1.size(), 5u);
    EXPECT_EQ(with1[0], (cplx{4, 0}));
    EXPECT_EQ(with1[1], (cplx{1, 0}));
    EXPECT_EQ(remove_cp(with1, 1), s);

    std::mt19937_64 rng(31);
    Signal r(8);
    for (auto& v : r) v = {std::uniform_real_distribution<double>(-1, 1)(rng),
                           std::uniform_real_distribution<double>(-1, 1)(rng)};
    EXPECT_EQ(remove_cp(add_cp(r, 3), 3), r);
}

TEST(CyclicPrefix, LengthErrors) {
    const Signal s{{1, 0}, {2, 0}};
    EXPECT_THROW(add_cp(s, 2), std::invalid_argument);
    EXPECT_THROW(remove_cp(s, 2), std::invalid_argument);
}

TEST(SystemConfig, ValidationCatchesBadShapes) {
    EXPECT_THROW(make_config(Waveform::DftSOfdm, 8, 3, 1, 2, 1, 2), std::invalid_argument);
    EXPECT_THROW(make_config(Waveform::DftSOfdm, 8, 2, 1, 3, 1, 2), std::invalid_argument);
    EXPECT_THROW(make_config(Waveform::DftSOfdm, 8, 2, 1, 2, 2, 2), std::invalid_argument);
    EXPECT_THROW(make_config(Waveform::DftSOfdmCm, 8, 2, 1, 2, 16, 2), std::invalid_argument);
    EXPECT_THROW(make_config(Waveform::DftSOfdm, 8, 2, 5, 2, 1, 2), std::invalid_argument);
    auto cfg = make_config(Waveform::DftSOfdmCm, 8, 2, 2, 2, 2, 2);
    cfg.user_subcarrier_indices = {1, 1};
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    auto afdm = make_config(Waveform::Afdm, 8, 2, 1, 2, 1, 2);
    afdm.chirp_direction = ChirpDirection::Down;
    EXPECT_THROW(afdm.validate(), std::invalid_argument);
    auto comb = make_config(Waveform::ChirpedDftSOfdm, 8, 2, 1, 2, 1, 2);
    comb.chirp_direction = ChirpDirection::Combined;
    EXPECT_THROW(comb.validate(), std::invalid_argument);
}
