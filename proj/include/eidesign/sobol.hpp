#ifndef EIDESIGN_SOBOL_HPP
#define EIDESIGN_SOBOL_HPP

#include <cstdint>
#include <vector>

#include "eidesign/model.hpp"

namespace eidesign {

// Sobol low-discrepancy sequence in [0,1)^d, Gray-code order, 32-bit
// precision, Joe-Kuo direction numbers for up to 21 dimensions. The
// first element of the sequence is the all-zeros point.
class SobolSequence {
public:
    static constexpr int kMaxDim = 21;
    static constexpr int kBits = 32;

    explicit SobolSequence(int dim);

    int dim() const { return dim_; }

    // Next point of the sequence, advancing the internal counter.
    Vector next();

    // Skips the next `count` points.
    void skip(std::uint64_t count);

private:
    int dim_;
    std::uint64_t index_ = 0;                  // points generated so far
    std::vector<std::uint32_t> state_;         // current integer coordinates
    std::vector<std::uint32_t> directions_;    // dim * kBits direction numbers
};

// First n points of the d-dimensional sequence after skipping `skip`
// points, scaled from [0,1)^d onto the box. Rows are points.
Matrix sobol_points(int dim, int n, const Box& box, std::uint64_t skip = 0);

}  // namespace eidesign

#endif  // EIDESIGN_SOBOL_HPP
