#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weakres/stl/affine.hpp"

namespace weakres::stl {

using Index = Eigen::Index;

/// Uniformly sampled k-dimensional trace. Row t of samples() is the state at
/// step t; column j holds variables()[j].
class Signal {
  public:
    Signal(std::vector<std::string> variables, Eigen::MatrixXd samples, double step_duration = 1.0);

    const std::vector<std::string>& variables() const { return variables_; }
    const Eigen::MatrixXd& samples() const { return samples_; }
    double step_duration() const { return step_duration_; }

    Index length() const { return samples_.rows(); }
    Index last_step() const { return samples_.rows() - 1; }
    Index dimension() const { return samples_.cols(); }

    std::optional<Index> index_of(std::string_view name) const;
    /// Throws InvalidInput for unknown names.
    Index require_index(std::string_view name) const;

    double operator()(Index t, Index var) const { return samples_(t, var); }
    double value(Index t, std::string_view name) const { return samples_(t, require_index(name)); }
    auto sample(Index t) const { return samples_.row(t); }

    double evaluate(const AffineExpr& expr, Index t) const;

    /// First `count` samples.
    Signal head(Index count) const;

  private:
    std::vector<std::string> variables_;
    Eigen::MatrixXd samples_;
    double step_duration_;
};

/// CSV with a header row of variable names, one row per step. An optional
/// leading comment "# step_duration=<seconds>" sets the metadata field.
Signal read_signal_csv(std::istream& in);
Signal read_signal_csv_file(const std::string& path);
void write_signal_csv(std::ostream& out, const Signal& signal);

} // namespace weakres::stl
