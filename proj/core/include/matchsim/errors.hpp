#pragma once

#include <stdexcept>
#include <string>

namespace matchsim {

// Base for every failure the library raises on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NegativeRateError : Error { using Error::Error; };
struct InvalidStateError : Error { using Error::Error; };
struct UnboundedError : Error { using Error::Error; };
struct TooLargeError : Error { using Error::Error; };
struct OffManifoldError : Error { using Error::Error; };
struct NotPsdError : Error { using Error::Error; };
struct BadBandError : Error { using Error::Error; };
struct BadInitError : Error { using Error::Error; };
struct StepTooLargeError : Error { using Error::Error; };
struct EmptySampleError : Error { using Error::Error; };
struct TooFewError : Error { using Error::Error; };
struct EmptyWindowError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace matchsim
