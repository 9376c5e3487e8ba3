#include "eidesign/sobol.hpp"

#include <bit>

namespace eidesign {

namespace {

// Primitive polynomial data for dimensions 2..21 (dimension 1 uses the
// van der Corput directions m_k = 1). Columns: degree s, coefficient
// bits a, then the s initial values m_1..m_s.
struct PolyRow {
    int s;
    std::uint32_t a;
    std::uint32_t m[7];
};

constexpr PolyRow kJoeKuo[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
};

}  // namespace

SobolSequence::SobolSequence(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim)
        throw DimensionError("Sobol sequence supports 1.." + std::to_string(kMaxDim) +
                             " dimensions, got " + std::to_string(dim));
    state_.assign(static_cast<std::size_t>(dim), 0u);
    directions_.assign(static_cast<std::size_t>(dim) * kBits, 0u);

    // First dimension: v_k = 2^(kBits-k).
    for (int k = 0; k < kBits; ++k) directions_[static_cast<std::size_t>(k)] = 1u << (kBits - 1 - k);

    for (int j = 1; j < dim; ++j) {
        const PolyRow& row = kJoeKuo[j - 1];
        std::uint32_t* v = &directions_[static_cast<std::size_t>(j) * kBits];
        const int s = row.s;
        for (int k = 0; k < s; ++k) v[k] = row.m[k] << (kBits - 1 - k);
        // Recurrence v_k = v_{k-s} ^ (v_{k-s} >> s) ^ sum of a-selected terms.
        for (int k = s; k < kBits; ++k) {
            v[k] = v[k - s] ^ (v[k - s] >> s);
            for (int i = 1; i < s; ++i)
                if ((row.a >> (s - 1 - i)) & 1u) v[k] ^= v[k - i];
        }
    }
}

Vector SobolSequence::next() {
    Vector x(dim_);
    if (index_ == 0) {
        x.setZero();
        ++index_;
        return x;
    }
    // Gray-code step: flip along the direction given by the lowest zero
    // bit of the previous index.
    const int c = std::countr_one(index_ - 1);
    for (int j = 0; j < dim_; ++j)
        state_[static_cast<std::size_t>(j)] ^=
            directions_[static_cast<std::size_t>(j) * kBits + c];
    constexpr double scale = 1.0 / 4294967296.0;  // 2^-32
    for (int j = 0; j < dim_; ++j) x[j] = state_[static_cast<std::size_t>(j)] * scale;
    ++index_;
    return x;
}

void SobolSequence::skip(std::uint64_t count) {
    for (std::uint64_t i = 0; i < count; ++i) next();
}

Matrix sobol_points(int dim, int n, const Box& box, std::uint64_t skip) {
    if (box.dim() != dim) throw DimensionError("box dimension does not match Sobol dimension");
    if (n < 1) throw DimensionError("Sobol point count must be positive");
    SobolSequence seq(dim);
    seq.skip(skip);
    Matrix pts(n, dim);
    for (int i = 0; i < n; ++i) {
        const Vector u = seq.next();
        for (int j = 0; j < dim; ++j)
            pts(i, j) = box.lower[j] + u[j] * (box.upper[j] - box.lower[j]);
    }
    return pts;
}

}  // namespace eidesign
