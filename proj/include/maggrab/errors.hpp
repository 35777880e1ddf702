#pragma once

#include <stdexcept>
#include <string>

namespace maggrab {

// Base for every error raised by the library. Callers that only need to
// distinguish "library refused the input" from anything else catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class PointOnConductor : public Error {
public:
    PointOnConductor() : Error("evaluation point lies on a conductor") {}
};

class NyquistViolation : public Error {
public:
    using Error::Error;
};

class AllAxesBelowFloor : public Error {
public:
    AllAxesBelowFloor() : Error("no axis reaches the amplitude floor") {}
};

class ZeroField : public Error {
public:
    ZeroField() : Error("field vector is zero") {}
};

class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

class IterationLimit : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

} // namespace maggrab
