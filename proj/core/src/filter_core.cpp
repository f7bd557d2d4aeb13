#include "rpkf/filter_core.hpp"

#include <string>
#include <utility>

namespace rpkf {

void StepModel::validate() const {
  const Eigen::Index r = transition.rows();
  if (transition.cols() != r) {
    throw InvalidInput("StepModel: transition matrix must be square");
  }
  if (measurement.cols() != r) {
    throw InvalidInput("StepModel: measurement matrix has " +
                       std::to_string(measurement.cols()) + " columns, state dimension is " +
                       std::to_string(r));
  }
  if (process_noise.rows() != r) {
    throw InvalidInput("StepModel: process noise must be " + std::to_string(r) + "x" +
                       std::to_string(r));
  }
  if (measurement_noise.rows() != measurement.rows()) {
    throw InvalidInput("StepModel: measurement noise must be " +
                       std::to_string(measurement.rows()) + "x" +
                       std::to_string(measurement.rows()));
  }
  linalg::require_psd(process_noise, "StepModel: process noise");
  linalg::require_psd(measurement_noise, "StepModel: measurement noise");
}

FilterState init(const InitialCondition& ic) {
  if (ic.cov.rows() != ic.mean.size()) {
    throw InvalidInput("InitialCondition: covariance dimension does not match the mean");
  }
  linalg::require_psd(ic.cov, "InitialCondition: covariance");
  FilterState s;
  s.step = 0;
  s.mean = ic.mean;
  s.cov = linalg::symmetrize(ic.cov);
  s.second_moment = linalg::symmetrize(ic.mean * ic.mean.transpose() + ic.cov);
  return s;
}

Matrix effective_process_noise(const StepModel& m, const Matrix& second_moment) {
  return linalg::symmetrize(m.process_noise + quad_form(m.transition, second_moment));
}

Matrix effective_measurement_noise(const StepModel& m, const Matrix& second_moment) {
  return linalg::symmetrize(m.measurement_noise + quad_form(m.measurement, second_moment));
}

PredictedState predict(const FilterState& s, const StepModel& m) {
  m.validate();
  if (s.mean.size() != m.state_dim()) {
    throw InvalidInput("predict: state has dimension " + std::to_string(s.mean.size()) +
                       ", model expects " + std::to_string(m.state_dim()));
  }
  const Matrix& f = m.transition.mean();
  const Matrix spread = quad_form(m.transition, s.second_moment);

  PredictedState p;
  p.step = s.step + 1;
  p.mean = f * s.mean;
  p.cov = linalg::symmetrize(f * s.cov * f.transpose() + m.process_noise + spread);
  p.second_moment =
      linalg::symmetrize(f * s.second_moment * f.transpose() + spread + m.process_noise);
  return p;
}

FilterState update(const PredictedState& p, const Vector& y, const StepModel& m,
                   const FilterOptions& options) {
  m.validate();
  if (p.mean.size() != m.state_dim()) {
    throw InvalidInput("update: state has dimension " + std::to_string(p.mean.size()) +
                       ", model expects " + std::to_string(m.state_dim()));
  }
  if (y.size() != m.measurement_dim()) {
    throw InvalidInput("update: measurement has dimension " + std::to_string(y.size()) +
                       ", model expects " + std::to_string(m.measurement_dim()));
  }
  const Matrix& h = m.measurement.mean();
  const Matrix r_eff = effective_measurement_noise(m, p.second_moment);
  const Matrix s = linalg::symmetrize(h * p.cov * h.transpose() + r_eff);
  const Matrix gain = linalg::right_solve_psd(p.cov * h.transpose(), s);

  FilterState out;
  out.step = p.step;
  out.mean = p.mean + gain * (y - h * p.mean);
  const Matrix i_kh = Matrix::Identity(p.cov.rows(), p.cov.cols()) - gain * h;
  switch (options.covariance_update) {
    case CovarianceUpdate::kStandard:
      out.cov = linalg::symmetrize(i_kh * p.cov);
      break;
    case CovarianceUpdate::kJoseph:
      out.cov = linalg::symmetrize(i_kh * p.cov * i_kh.transpose() +
                                   gain * r_eff * gain.transpose());
      break;
  }
  out.second_moment = p.second_moment;
  return out;
}

FilterState step(const FilterState& s, const Vector& y, const StepModel& m,
                 const FilterOptions& options) {
  return update(predict(s, m), y, m, options);
}

RandomParameterFilter::RandomParameterFilter(ModelProvider model, const InitialCondition& ic,
                                             FilterOptions options)
    : model_(std::move(model)), options_(options), state_(init(ic)) {
  if (!model_) throw InvalidInput("RandomParameterFilter: empty model provider");
}

const FilterState& RandomParameterFilter::step(const Vector& y) {
  state_ = rpkf::step(state_, y, model_(state_.step + 1), options_);
  return state_;
}

}  // namespace rpkf
