#ifndef GPE_VERSION_HPP
#define GPE_VERSION_HPP

namespace gpe {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
