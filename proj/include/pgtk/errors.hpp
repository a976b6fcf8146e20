#pragma once

#include <stdexcept>
#include <string>

namespace pgtk {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File missing, unreadable, or unwritable.
struct IoError : Error {
    using Error::Error;
};

// File exists but its contents cannot be decoded.
struct DecodeError : Error {
    using Error::Error;
};

// Decodable file uses a color type / bit depth / layout we do not accept.
struct UnsupportedFormatError : Error {
    using Error::Error;
};

// Operands whose shapes must agree do not.
struct DimensionError : Error {
    using Error::Error;
};

// Invalid configuration value or argument outside its contract.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace pgtk
