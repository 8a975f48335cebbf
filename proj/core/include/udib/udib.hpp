#ifndef UDIB_UDIB_HPP
#define UDIB_UDIB_HPP

#include "udib/clustering.hpp"
#include "udib/corpus.hpp"
#include "udib/divergence.hpp"
#include "udib/error.hpp"
#include "udib/export.hpp"
#include "udib/selection.hpp"

namespace udib {
inline constexpr const char* kVersion = "0.3.0";
}

#endif  // UDIB_UDIB_HPP
