#pragma once

#include <stdexcept>
#include <string>

namespace cfront {

/// A value left the admissible domain of a model function (typically v <= 1).
class DomainError : public std::domain_error {
public:
    DomainError(const std::string& what, double offending)
        : std::domain_error(what), value_(offending) {}
    double value() const noexcept { return value_; }

private:
    double value_;
};

/// Caller supplied arguments that violate a documented precondition.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An integrator or root finder could not make progress.
/// `position` is the last abscissa reached before giving up.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double position)
        : std::runtime_error(what), position_(position) {}
    double position() const noexcept { return position_; }

private:
    double position_;
};

/// The tabulated range does not contain what was asked for.
class ExtendDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// min(v) <= 1 after a time step.
class CongestionViolation : public std::runtime_error {
public:
    CongestionViolation(const std::string& what, double min_v, double x)
        : std::runtime_error(what), min_v_(min_v), x_(x) {}
    double min_v() const noexcept { return min_v_; }
    double where() const noexcept { return x_; }

private:
    double min_v_;
    double x_;
};

/// Integrated quantities requested for data that does not have zero mass.
class MassDefectError : public std::runtime_error {
public:
    MassDefectError(const std::string& what, double defect_w, double defect_v)
        : std::runtime_error(what), defect_w_(defect_w), defect_v_(defect_v) {}
    double defect_w() const noexcept { return defect_w_; }
    double defect_v() const noexcept { return defect_v_; }

private:
    double defect_w_;
    double defect_v_;
};

}  // namespace cfront
