#include "lsv/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace lsv {

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

double round_sig10(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  return std::strtod(format_number(x).c_str(), nullptr);
}

namespace {

OrderedJson number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round_sig10(x);
}

OrderedJson numbers(const std::vector<double>& xs) {
  OrderedJson arr = OrderedJson::array();
  for (double x : xs) arr.push_back(number(x));
  return arr;
}

}  // namespace

OrderedJson to_json(const WitnessReport& r) {
  OrderedJson j;
  j["n"] = r.n;
  j["column"] = r.column + 1;
  j["x"] = numbers(r.x);
  j["norm_x"] = number(r.norm_x);
  j["ainv_x_norm"] = number(r.ainv_x_norm);
  j["a"] = numbers(r.a);
  j["b"] = numbers(r.b);
  j["ratio_sum_sq"] = number(r.ratio_sum_sq);
  j["s_n"] = number(r.s_n);
  j["implied_bound"] = number(r.implied_bound);
  OrderedJson v = OrderedJson::array();
  for (const auto& viol : r.violations) {
    OrderedJson o;
    o["check"] = viol.check;
    o["value"] = number(viol.value);
    o["tolerance"] = number(viol.tolerance);
    o["detail"] = viol.detail;
    v.push_back(std::move(o));
  }
  j["violations"] = std::move(v);
  return j;
}

OrderedJson to_json(const LcdResult& r, const LcdQuery& q) {
  OrderedJson j;
  j["theta_star"] = r.theta_star ? number(*r.theta_star) : OrderedJson(nullptr);
  j["unbounded"] = !r.bounded();
  j["achieved_dist"] = r.bounded() ? number(r.achieved_dist) : OrderedJson(nullptr);
  j["certificate"] = r.certificate;
  j["slack"] = number(r.slack);
  j["samples"] = r.samples;
  OrderedJson p;
  p["alpha"] = number(q.alpha);
  p["gamma"] = number(q.gamma);
  p["theta_max"] = number(q.theta_max);
  p["grid_step"] = number(r.grid_step);
  j["parameters"] = std::move(p);
  j["direction"] = numbers(r.direction);
  return j;
}

OrderedJson to_json(const SmallBallEstimate& e, Ensemble ensemble) {
  OrderedJson j;
  j["ensemble"] = std::string(ensemble.name());
  j["epsilon"] = number(e.epsilon);
  j["trials"] = e.trials;
  j["hits"] = e.hits;
  j["p_hat"] = number(e.p_hat);
  j["ci_low"] = number(e.ci.low);
  j["ci_high"] = number(e.ci.high);
  return j;
}

OrderedJson to_json(const DistanceTailReport& r) {
  OrderedJson j;
  j["ensemble"] = std::string(r.ensemble.name());
  j["n"] = r.n;
  j["trials"] = r.samples.size();
  j["singular_count"] = r.singular_count;
  j["ks_half_normal"] = number(r.ks_half_normal);
  OrderedJson rows = OrderedJson::array();
  for (std::size_t i = 0; i < r.thresholds.size(); ++i) {
    OrderedJson row;
    row["u"] = number(r.thresholds[i]);
    row["p_exceed"] = number(r.exceed_probability[i]);
    row["half_normal"] = number(r.half_normal_reference[i]);
    rows.push_back(std::move(row));
  }
  j["tail"] = std::move(rows);
  j["samples"] = numbers(r.samples);
  return j;
}

OrderedJson to_json(const TailFit& fit) {
  OrderedJson j;
  j["direction"] = std::string(to_string(fit.direction));
  j["n"] = fit.n;
  j["model"] = fit.direction == TailDirection::upper ? "C*log(K)/K" : "C*eps";
  j["constant"] = number(fit.constant);
  j["K"] = numbers(fit.k);
  j["p_hat"] = numbers(fit.p_hat);
  j["fitted"] = numbers(fit.model);
  j["residuals"] = numbers(fit.residuals);
  j["rms_residual"] = number(fit.rms_residual);
  return j;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace lsv
