#pragma once

#include <stdexcept>
#include <string>

namespace cascnet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

/// Malformed input file; carries the 1-based offending line.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
    int line;
};

class SelfLoopError : public Error {
public:
    SelfLoopError(int node, int line)
        : Error("self-loop at node " + std::to_string(node) +
                " (line " + std::to_string(line) + ")"),
          node(node), line(line) {}
    int node;
    int line;
};

class UnconnectableParams : public Error {
public:
    using Error::Error;
};

class PowerIterationDiverged : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class SolverFailure : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

class NoValidDefense : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace cascnet
