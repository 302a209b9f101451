#pragma once

#include <cstddef>

namespace apfv::detail {

inline std::size_t wrap(long k, std::size_t n) {
    const long m = static_cast<long>(n);
    return static_cast<std::size_t>(((k % m) + m) % m);
}

}  // namespace apfv::detail
