#include "sdeu/format.hpp"

#include <array>
#include <charconv>

namespace sdeu {

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

}  // namespace sdeu
