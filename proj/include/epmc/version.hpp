#ifndef EPMC_VERSION_HPP
#define EPMC_VERSION_HPP

namespace epmc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace epmc

#endif  // EPMC_VERSION_HPP
