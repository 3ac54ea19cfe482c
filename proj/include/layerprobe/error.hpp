#ifndef LAYERPROBE_ERROR_HPP_
#define LAYERPROBE_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace layerprobe {

// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// FTD file could not be decoded.
class FormatError : public std::runtime_error {
public:
    enum class Kind { io, bad_magic, unknown_format, bad_ndim, truncated, trailing_bytes };

    FormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

// Decoded data violates a value invariant (non-finite entries, bad shapes).
class ValidationError : public std::runtime_error {
public:
    ValidationError(const std::string& what, std::size_t index = 0)
        : std::runtime_error(what), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// Malformed or schema-violating manifest JSON.
class ManifestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Evaluation set holds fewer than two distinct classes.
class DegenerateSplitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss or gradient.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, int last_finite_epoch)
        : std::runtime_error(what), last_finite_epoch_(last_finite_epoch) {}

    // 1-based; 0 when no epoch completed with a finite loss.
    int last_finite_epoch() const noexcept { return last_finite_epoch_; }

private:
    int last_finite_epoch_;
};

}  // namespace layerprobe

#endif  // LAYERPROBE_ERROR_HPP_
