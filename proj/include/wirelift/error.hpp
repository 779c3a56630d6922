#pragma once

#include <stdexcept>
#include <string>

namespace wirelift {

// Precondition violated by a value (non-positive depth, wrong edge kind, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed or invariant-violating interchange/config document.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wirelift
