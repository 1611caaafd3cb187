#pragma once

#include <array>
#include <string>

#include "ovd/errors.hpp"

namespace ovd {

/// The eight cabin occupancy scenarios: empty car, or any combination of the
/// three seat rows holding at least one person. Codes are stable and ordered.
enum class OccupancyClass : int {
    NoOne = 0,
    Row1 = 1,
    Row2 = 2,
    Row3 = 3,
    Row12 = 4,
    Row13 = 5,
    Row23 = 6,
    Row123 = 7,
};

inline constexpr int kNumClasses = 8;

inline constexpr std::array<OccupancyClass, kNumClasses> kAllClasses = {
    OccupancyClass::NoOne,  OccupancyClass::Row1,  OccupancyClass::Row2,
    OccupancyClass::Row3,   OccupancyClass::Row12, OccupancyClass::Row13,
    OccupancyClass::Row23,  OccupancyClass::Row123};

inline const char* class_name(OccupancyClass c) {
    switch (c) {
        case OccupancyClass::NoOne:  return "NoOne";
        case OccupancyClass::Row1:   return "Row1";
        case OccupancyClass::Row2:   return "Row2";
        case OccupancyClass::Row3:   return "Row3";
        case OccupancyClass::Row12:  return "Row12";
        case OccupancyClass::Row13:  return "Row13";
        case OccupancyClass::Row23:  return "Row23";
        case OccupancyClass::Row123: return "Row123";
    }
    throw ConfigError("invalid occupancy class code");
}

inline OccupancyClass class_from_code(int code) {
    if (code < 0 || code >= kNumClasses) {
        throw ConfigError("occupancy class code out of range: " + std::to_string(code));
    }
    return static_cast<OccupancyClass>(code);
}

inline OccupancyClass class_from_name(const std::string& name) {
    for (OccupancyClass c : kAllClasses) {
        if (name == class_name(c)) return c;
    }
    throw ConfigError("unknown occupancy class name: " + name);
}

/// Zero-based indices of the occupied rows for a class (subset of {0,1,2}).
inline std::array<bool, 3> occupied_rows(OccupancyClass c) {
    switch (c) {
        case OccupancyClass::NoOne:  return {false, false, false};
        case OccupancyClass::Row1:   return {true, false, false};
        case OccupancyClass::Row2:   return {false, true, false};
        case OccupancyClass::Row3:   return {false, false, true};
        case OccupancyClass::Row12:  return {true, true, false};
        case OccupancyClass::Row13:  return {true, false, true};
        case OccupancyClass::Row23:  return {false, true, true};
        case OccupancyClass::Row123: return {true, true, true};
    }
    throw ConfigError("invalid occupancy class code");
}

} // namespace ovd
