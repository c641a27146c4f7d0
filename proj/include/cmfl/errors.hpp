#ifndef CMFL_ERRORS_HPP
#define CMFL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cmfl {

struct EmptyBatch : std::runtime_error {
    EmptyBatch() : std::runtime_error("empty batch") {}
};

struct EmptyDataset : std::runtime_error {
    EmptyDataset() : std::runtime_error("empty dataset") {}
};

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error("shape mismatch: " + what) {}
};

struct IndexOutOfRange : std::runtime_error {
    explicit IndexOutOfRange(const std::string& what) : std::runtime_error("index out of range: " + what) {}
};

struct NonFiniteProb : std::runtime_error {
    NonFiniteProb() : std::runtime_error("probability of the gold class is not positive") {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error("domain error: " + what) {}
};

struct ZeroCount : std::runtime_error {
    explicit ZeroCount(std::size_t cls)
        : std::runtime_error("class " + std::to_string(cls) + " has zero count") {}
};

struct LengthMismatch : std::runtime_error {
    explicit LengthMismatch(const std::string& what) : std::runtime_error("length mismatch: " + what) {}
};

struct UnknownLabel : std::runtime_error {
    UnknownLabel(const std::string& label, std::size_t line)
        : std::runtime_error("unknown label '" + label + "' at line " + std::to_string(line)),
          label(label), line(line) {}
    explicit UnknownLabel(const std::string& label)
        : std::runtime_error("unknown label '" + label + "'"), label(label), line(0) {}
    std::string label;
    std::size_t line;
};

struct MalformedLine : std::runtime_error {
    MalformedLine(const std::string& path, std::size_t line)
        : std::runtime_error(path + ":" + std::to_string(line) + ": malformed line"), line(line) {}
    std::size_t line;
};

struct SingularCovariance : std::runtime_error {
    SingularCovariance() : std::runtime_error("Stuart-Maxwell covariance matrix is singular") {}
};

struct BadMagic : std::runtime_error {
    BadMagic() : std::runtime_error("not a model file (bad magic)") {}
};

struct UnsupportedVersion : std::runtime_error {
    explicit UnsupportedVersion(unsigned v)
        : std::runtime_error("unsupported model file version " + std::to_string(v)) {}
};

struct Truncated : std::runtime_error {
    Truncated() : std::runtime_error("model file truncated") {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& path) : std::runtime_error("I/O error: " + path) {}
};

}  // namespace cmfl

#endif
