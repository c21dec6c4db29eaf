/*
 * errors.hpp - error codes and the exception type used across the toolkit.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iris {

enum class Errc {
    MissingMask,
    BorderViolation,
    DimensionMismatch,
    NoPupilFound,
    NoIrisFound,
    GeometryError,
    RankError,
    InsufficientOverlap,
    OrientationError,
    InsufficientData,
    DegenerateDistribution,
    SpecError,
    IoError,
    ConfigError,
};

inline std::string_view errc_name(Errc c) {
    switch (c) {
        case Errc::MissingMask: return "MissingMask";
        case Errc::BorderViolation: return "BorderViolation";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::NoPupilFound: return "NoPupilFound";
        case Errc::NoIrisFound: return "NoIrisFound";
        case Errc::GeometryError: return "GeometryError";
        case Errc::RankError: return "RankError";
        case Errc::InsufficientOverlap: return "InsufficientOverlap";
        case Errc::OrientationError: return "OrientationError";
        case Errc::InsufficientData: return "InsufficientData";
        case Errc::DegenerateDistribution: return "DegenerateDistribution";
        case Errc::SpecError: return "SpecError";
        case Errc::IoError: return "IoError";
        case Errc::ConfigError: return "ConfigError";
    }
    return "Error";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
    throw Error(code, what);
}

} // namespace iris
