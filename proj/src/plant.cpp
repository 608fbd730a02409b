#include "evslip/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evslip {

PlantState step_plant(PlantState s, double dt, const PlantInputs& in) {
  if (!(dt > 0.0)) throw std::invalid_argument("plant step must be positive");
  if (in.supported) {
    s.y_vel = 0.0;
    s.slipping = false;
    return s;
  }
  const double m = s.total_mass();
  const double g_eff = in.gravity + in.arm_accel;
  const double capacity = s.friction_capacity();
  if (s.y_vel <= 0.0 && m * g_eff <= capacity) {
    s.y_vel = 0.0;
    s.slipping = false;
    return s;
  }
  const double a = g_eff - capacity / m;
  const double v = s.y_vel + a * dt;
  if (v <= 0.0) {
    s.y_vel = 0.0;
    s.slipping = false;
    return s;
  }
  s.y_vel = v;
  s.y_pos += v * dt;
  s.slipping = true;
  return s;
}

PlantState apply_load(PlantState s, double load_mass, double impact_velocity) {
  if (load_mass < 0.0) throw std::invalid_argument("load mass must be nonnegative");
  const double m_old = s.total_mass();
  s.load_mass += load_mass;
  const double v = (m_old * s.y_vel + load_mass * impact_velocity) / s.total_mass();
  s.y_vel = std::max(0.0, v);
  s.slipping = s.y_vel > 0.0;
  return s;
}

void ActuatorParams::validate() const {
  if (!(time_constant_s > 0.0)) throw std::invalid_argument("actuator time constant must be positive");
  if (delay_s < 0.0) throw std::invalid_argument("actuator delay must be nonnegative");
  if (overshoot < 0.0) throw std::invalid_argument("actuator overshoot must be nonnegative");
}

GripActuator::GripActuator(ActuatorParams params, double initial_percent)
    : params_(params), actual_(initial_percent), setpoint_(initial_percent) {
  params_.validate();
}

void GripActuator::command(TimeUs t_us, double percent) {
  const auto delay_us = static_cast<TimeUs>(std::llround(params_.delay_s * 1e6));
  pending_.push_back({t_us + delay_us, percent});
}

double GripActuator::update(TimeUs t_us, double dt_s) {
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->effective_us <= t_us) {
      step_ = it->percent - setpoint_;
      step_time_us_ = it->effective_us;
      setpoint_ = it->percent;
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  double target = setpoint_;
  if (params_.overshoot > 0.0 && step_ > 0.0) {
    const double age_s = static_cast<double>(t_us - step_time_us_) * 1e-6;
    target += params_.overshoot * step_ * std::exp(-age_s / params_.time_constant_s);
  }
  actual_ += (target - actual_) * (1.0 - std::exp(-dt_s / params_.time_constant_s));
  actual_ = std::clamp(actual_, 0.0, 100.0);
  return actual_;
}

}  // namespace evslip
