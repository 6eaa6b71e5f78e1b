#ifndef NCASP_VERSION_HPP
#define NCASP_VERSION_HPP

namespace ncasp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ncasp

#endif  // NCASP_VERSION_HPP
