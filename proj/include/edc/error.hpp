#pragma once

#include <stdexcept>
#include <string>

namespace edc {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters: non-positive durations, unaligned times, bad counts.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Two waves that were combined live on different time grids.
class GridError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a closed-form function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Detector probabilities do not sum to one.
class ConservationError : public Error {
public:
    using Error::Error;
};

/// A bench program whose wiring does not match any known experiment.
class TopologyError : public Error {
public:
    using Error::Error;
};

/// Propagated norms disagree with the closed-form oracle.
class CheckFailure : public Error {
public:
    using Error::Error;
};

} // namespace edc
