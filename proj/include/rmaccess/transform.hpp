#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace rmaccess {

using CVec = std::vector<std::complex<double>>;

// Transform with kernel t_{i,j} = (-1)^(a_i . ~a_j), i.e. the natural-order
// Hadamard matrix with bit-complemented column indexing. Since complementing
// an s-bit index reverses the position order, this is the textbook in-place
// butterfly applied to the reversed input. Self-inverse up to a factor 2^s.
//
// A Walsh row of frequency alpha transforms to a single peak of height
// 2^(s-1) at position <alpha>.
//
// If mult_count is given it is advanced by s*2^s, the conventional operation
// count of the fast transform (one add/sub output per element per stage).
CVec fwht_flipped(CVec x, std::uint64_t* mult_count = nullptr);

}  // namespace rmaccess
