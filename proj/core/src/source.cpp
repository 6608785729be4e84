#include "fracheat/source.hpp"

#include <algorithm>
#include <set>

#include "fracheat/errors.hpp"

namespace fracheat {

SourceFunction::SourceFunction(EigenSystem sys, TimeGrid grid, Cylinder support, Eigen::MatrixXd samples)
    : sys_(std::move(sys)), grid_(grid), support_(std::move(support)), samples_(std::move(samples)) {
  const double T = grid_.horizon();
  if (!(T > 0.0)) throw ContractError("source grid needs a physical horizon T");
  if (support_.patch.empty()) throw ContractError("source support patch is empty");
  if (!(support_.t_a < support_.t_b)) throw ContractError("source support needs t_a < t_b");
  if (support_.t_a < -T || support_.t_b > T) throw ContractError("source time support must lie in (-T, T)");
  std::set<int> seen;
  for (int i : support_.patch) {
    if (i < 0 || i >= sys_.node_count()) throw ContractError("source patch node out of range");
    if (!seen.insert(i).second) throw ContractError("source patch lists a node twice");
  }
  if (samples_.rows() != static_cast<Eigen::Index>(support_.patch.size()) || samples_.cols() != grid_.size())
    throw ContractError("source samples must be patch size x N_t");
  if (!samples_.allFinite()) throw ContractError("source samples must be finite");
  std::vector<bool> inside(static_cast<std::size_t>(grid_.size()), false);
  for (int j : interior_indices(grid_, support_.t_a, support_.t_b)) inside[static_cast<std::size_t>(j)] = true;
  for (int j = 0; j < grid_.size(); ++j)
    if (!inside[static_cast<std::size_t>(j)] && samples_.col(j).cwiseAbs().maxCoeff() != 0.0)
      throw ContractError("source is nonzero outside its declared time support");
}

SourceFunction SourceFunction::from_field(const SpaceTimeField& f, const Cylinder& support) {
  std::vector<int> all(static_cast<std::size_t>(f.samples()));
  for (int j = 0; j < f.samples(); ++j) all[static_cast<std::size_t>(j)] = j;
  Eigen::MatrixXd s = f.synthesize(support.patch, all).real();
  std::vector<bool> inside(static_cast<std::size_t>(f.samples()), false);
  for (int j : interior_indices(f.grid(), support.t_a, support.t_b)) inside[static_cast<std::size_t>(j)] = true;
  for (int j = 0; j < f.samples(); ++j)
    if (!inside[static_cast<std::size_t>(j)]) s.col(j).setZero();
  return SourceFunction(f.system(), f.grid(), support, std::move(s));
}

SourceFunction SourceFunction::zero(const EigenSystem& sys, const TimeGrid& grid, const Cylinder& support) {
  return SourceFunction(sys, grid, support,
                        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(support.patch.size()), grid.size()));
}

SpaceTimeField SourceFunction::field() const {
  const Eigen::MatrixXd phi = sys_.node_values(support_.patch);
  Eigen::VectorXd w(static_cast<Eigen::Index>(support_.patch.size()));
  for (std::size_t i = 0; i < support_.patch.size(); ++i)
    w(static_cast<Eigen::Index>(i)) = sys_.quadrature().weights(support_.patch[i]);
  const Eigen::MatrixXd coeffs = phi * w.asDiagonal() * samples_;
  return SpaceTimeField(sys_, grid_, coeffs.cast<cplx>(), true);
}

SourceFunction SourceFunction::scaled(double a) const {
  return SourceFunction(sys_, grid_, support_, a * samples_);
}

SourceFunction SourceFunction::plus(const SourceFunction& other) const {
  if (!sys_.same_as(other.sys_) || !grid_.compatible(other.grid_))
    throw ContractError("sources live on different eigensystems or grids");
  if (support_.patch == other.support_.patch) {
    Cylinder c = support_;
    c.t_a = std::min(c.t_a, other.support_.t_a);
    c.t_b = std::max(c.t_b, other.support_.t_b);
    return SourceFunction(sys_, grid_, c, samples_ + other.samples_);
  }
  std::vector<int> patch = support_.patch;
  for (int i : other.support_.patch)
    if (std::find(patch.begin(), patch.end(), i) == patch.end()) patch.push_back(i);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(patch.size()), grid_.size());
  auto row_of = [&patch](int node) {
    return static_cast<Eigen::Index>(std::find(patch.begin(), patch.end(), node) - patch.begin());
  };
  for (std::size_t r = 0; r < support_.patch.size(); ++r) s.row(row_of(support_.patch[r])) += samples_.row(static_cast<Eigen::Index>(r));
  for (std::size_t r = 0; r < other.support_.patch.size(); ++r)
    s.row(row_of(other.support_.patch[r])) += other.samples_.row(static_cast<Eigen::Index>(r));
  Cylinder c{patch, std::min(support_.t_a, other.support_.t_a), std::max(support_.t_b, other.support_.t_b)};
  return SourceFunction(sys_, grid_, c, std::move(s));
}

}  // namespace fracheat
