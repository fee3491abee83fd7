#pragma once

#include <stdexcept>
#include <string>

namespace ucsat {

// Base for everything this library throws on bad input.
struct Error : std::runtime_error {
	explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Malformed instance files, values outside the representable domain,
// unusable solver output. CLI maps these to exit code 65.
struct DataError : Error {
	explicit DataError(const std::string &msg) : Error(msg) {}
};

// A value cannot be expressed in the requested bit format.
struct EncodeError : DataError {
	explicit EncodeError(const std::string &msg) : DataError(msg) {}
};

} // namespace ucsat
