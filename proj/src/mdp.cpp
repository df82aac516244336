#include "dprl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dprl {

namespace {

constexpr double kRowSumTol = 1e-9;

void check_range(int value, int bound, const char* what) {
  if (value < 0 || value >= bound) {
    std::ostringstream msg;
    msg << what << " " << value << " out of range [0, " << bound << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

std::string to_string(CostNoise noise) {
  return noise == CostNoise::kBernoulli ? "bernoulli" : "deterministic";
}

CostNoise cost_noise_from_string(const std::string& name) {
  if (name == "bernoulli") return CostNoise::kBernoulli;
  if (name == "deterministic") return CostNoise::kDeterministic;
  throw std::invalid_argument("unknown cost_noise '" + name +
                              "' (expected 'bernoulli' or 'deterministic')");
}

MdpSpec MdpSpec::with_dims(int num_states, int num_actions, int horizon,
                           int initial_state) {
  MdpSpec mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.horizon = horizon;
  mdp.initial_state = initial_state;
  const std::size_t cells =
      static_cast<std::size_t>(horizon) * num_states * num_actions;
  mdp.transitions.assign(cells * num_states, 0.0);
  mdp.mean_costs.assign(cells, 0.0);
  return mdp;
}

void MdpSpec::validate() const {
  if (num_states <= 0 || num_actions <= 0 || horizon <= 0) {
    throw std::invalid_argument("MdpSpec: dimensions must be positive");
  }
  if (initial_state < 0 || initial_state >= num_states) {
    throw std::invalid_argument("MdpSpec: initial_state out of range");
  }
  const std::size_t cells =
      static_cast<std::size_t>(horizon) * num_states * num_actions;
  if (mean_costs.size() != cells || transitions.size() != cells * num_states) {
    throw std::invalid_argument("MdpSpec: tensor sizes do not match dimensions");
  }
  for (double c : mean_costs) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw std::invalid_argument("MdpSpec: mean costs must lie in [0,1]");
    }
  }
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < num_states; ++s2) {
          const double p = transition(h, s, a, s2);
          if (!(p >= 0.0)) {
            throw std::invalid_argument("MdpSpec: negative transition probability");
          }
          sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol) {
          std::ostringstream msg;
          msg << "MdpSpec: transition row (h=" << h << ", s=" << s << ", a=" << a
              << ") sums to " << sum;
          throw std::invalid_argument(msg.str());
        }
      }
    }
  }
}

MdpSpec build_riverswim(const RiverSwimParams& params) {
  if (params.num_states < 2) {
    throw std::invalid_argument("build_riverswim: need at least 2 states");
  }
  const auto check_dist = [](std::initializer_list<double> probs, const char* what) {
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) {
        throw std::invalid_argument(std::string("build_riverswim: negative mass in ") + what);
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      throw std::invalid_argument(std::string("build_riverswim: ") + what +
                                  " does not sum to 1");
    }
  };
  check_dist({params.right_back, params.right_stay, params.right_forward},
             "interior right triple");
  check_dist({params.leftmost_stay, params.leftmost_forward}, "leftmost right pair");
  check_dist({params.rightmost_stay, params.rightmost_back}, "rightmost right pair");

  const int S = params.num_states;
  const int kLeft = 0;
  const int kRight = 1;
  MdpSpec mdp = MdpSpec::with_dims(S, 2, params.horizon, 0);
  mdp.cost_noise = params.cost_noise;
  for (int h = 0; h < params.horizon; ++h) {
    for (int s = 0; s < S; ++s) {
      mdp.transition(h, s, kLeft, std::max(0, s - 1)) = 1.0;
      if (s == 0) {
        mdp.transition(h, s, kRight, 0) = params.leftmost_stay;
        mdp.transition(h, s, kRight, 1) = params.leftmost_forward;
      } else if (s == S - 1) {
        mdp.transition(h, s, kRight, S - 1) = params.rightmost_stay;
        mdp.transition(h, s, kRight, S - 2) = params.rightmost_back;
      } else {
        mdp.transition(h, s, kRight, s - 1) = params.right_back;
        mdp.transition(h, s, kRight, s) = params.right_stay;
        mdp.transition(h, s, kRight, s + 1) = params.right_forward;
      }
      mdp.mean_cost(h, s, kLeft) = params.cost_default;
      mdp.mean_cost(h, s, kRight) = params.cost_default;
    }
    mdp.mean_cost(h, 0, kLeft) = params.cost_left_at_leftmost;
    mdp.mean_cost(h, S - 1, kRight) = params.cost_right_at_rightmost;
  }
  mdp.validate();
  return mdp;
}

PolicyTable PolicyTable::uniform(int horizon, int num_states, int num_actions) {
  PolicyTable policy;
  policy.horizon = horizon;
  policy.num_states = num_states;
  policy.num_actions = num_actions;
  policy.probs.assign(
      static_cast<std::size_t>(horizon) * num_states * num_actions,
      1.0 / num_actions);
  return policy;
}

void PolicyTable::validate() const {
  if (horizon <= 0 || num_states <= 0 || num_actions <= 0) {
    throw std::invalid_argument("PolicyTable: dimensions must be positive");
  }
  if (probs.size() !=
      static_cast<std::size_t>(horizon) * num_states * num_actions) {
    throw std::invalid_argument("PolicyTable: size does not match dimensions");
  }
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      double sum = 0.0;
      for (int a = 0; a < num_actions; ++a) {
        const double p = prob(h, s, a);
        if (!(p >= 0.0)) {
          throw std::invalid_argument("PolicyTable: negative probability");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTol) {
        throw std::invalid_argument("PolicyTable: row is not a distribution");
      }
    }
  }
}

ValueTable ValueTable::zeros(int horizon, int num_states) {
  ValueTable table;
  table.horizon = horizon;
  table.num_states = num_states;
  table.values.assign(static_cast<std::size_t>(horizon + 1) * num_states, 0.0);
  return table;
}

QTable QTable::zeros(int horizon, int num_states, int num_actions) {
  QTable table;
  table.horizon = horizon;
  table.num_states = num_states;
  table.num_actions = num_actions;
  table.values.assign(
      static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0);
  return table;
}

StepResult step(const MdpSpec& mdp, int state, int action, int h, Rng& rng) {
  check_range(state, mdp.num_states, "state");
  check_range(action, mdp.num_actions, "action");
  check_range(h, mdp.horizon, "step index");
  StepResult result;
  const double mean = mdp.mean_cost(h, state, action);
  result.cost = mdp.cost_noise == CostNoise::kBernoulli
                    ? (rng.bernoulli(mean) ? 1.0 : 0.0)
                    : mean;
  result.next_state = rng.categorical(mdp.transition_row(h, state, action));
  return result;
}

Trajectory rollout(const MdpSpec& mdp, const PolicyTable& policy, Rng& rng) {
  if (policy.horizon != mdp.horizon || policy.num_states != mdp.num_states ||
      policy.num_actions != mdp.num_actions) {
    throw std::invalid_argument("rollout: policy shape does not match the MDP");
  }
  Trajectory traj;
  traj.reserve(mdp.horizon);
  int s = mdp.initial_state;
  for (int h = 0; h < mdp.horizon; ++h) {
    const int a = rng.categorical(policy.row(h, s));
    const StepResult r = step(mdp, s, a, h, rng);
    traj.push_back({s, a, r.cost, r.next_state});
    s = r.next_state;
  }
  return traj;
}

ValueTable exact_policy_value(const MdpSpec& mdp, const PolicyTable& policy) {
  if (policy.horizon != mdp.horizon || policy.num_states != mdp.num_states ||
      policy.num_actions != mdp.num_actions) {
    throw std::invalid_argument(
        "exact_policy_value: policy shape does not match the MDP");
  }
  ValueTable v = ValueTable::zeros(mdp.horizon, mdp.num_states);
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    for (int s = 0; s < mdp.num_states; ++s) {
      double vs = 0.0;
      for (int a = 0; a < mdp.num_actions; ++a) {
        double q = mdp.mean_cost(h, s, a);
        for (int s2 = 0; s2 < mdp.num_states; ++s2) {
          q += mdp.transition(h, s, a, s2) * v.value(h + 1, s2);
        }
        vs += policy.prob(h, s, a) * q;
      }
      v.value(h, s) = vs;
    }
  }
  return v;
}

OptimalSolution optimal_values(const MdpSpec& mdp) {
  OptimalSolution sol;
  sol.values = ValueTable::zeros(mdp.horizon, mdp.num_states);
  sol.policy = PolicyTable::uniform(mdp.horizon, mdp.num_states, mdp.num_actions);
  std::fill(sol.policy.probs.begin(), sol.policy.probs.end(), 0.0);
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    for (int s = 0; s < mdp.num_states; ++s) {
      double best = 0.0;
      int best_action = 0;
      for (int a = 0; a < mdp.num_actions; ++a) {
        double q = mdp.mean_cost(h, s, a);
        for (int s2 = 0; s2 < mdp.num_states; ++s2) {
          q += mdp.transition(h, s, a, s2) * sol.values.value(h + 1, s2);
        }
        if (a == 0 || q < best) {
          best = q;
          best_action = a;
        }
      }
      sol.values.value(h, s) = best;
      sol.policy.prob(h, s, best_action) = 1.0;
    }
  }
  return sol;
}

namespace {

using nlohmann::json;

json mdp_to_json(const MdpSpec& mdp) {
  json doc;
  doc["num_states"] = mdp.num_states;
  doc["num_actions"] = mdp.num_actions;
  doc["horizon"] = mdp.horizon;
  doc["initial_state"] = mdp.initial_state;
  doc["cost_noise"] = to_string(mdp.cost_noise);
  json trans = json::array();
  json costs = json::array();
  for (int h = 0; h < mdp.horizon; ++h) {
    json th = json::array();
    json ch = json::array();
    for (int s = 0; s < mdp.num_states; ++s) {
      json ts = json::array();
      json cs = json::array();
      for (int a = 0; a < mdp.num_actions; ++a) {
        json row = json::array();
        for (int s2 = 0; s2 < mdp.num_states; ++s2) {
          row.push_back(mdp.transition(h, s, a, s2));
        }
        ts.push_back(std::move(row));
        cs.push_back(mdp.mean_cost(h, s, a));
      }
      th.push_back(std::move(ts));
      ch.push_back(std::move(cs));
    }
    trans.push_back(std::move(th));
    costs.push_back(std::move(ch));
  }
  doc["transitions"] = std::move(trans);
  doc["mean_costs"] = std::move(costs);
  return doc;
}

MdpSpec mdp_from_json(const json& doc) {
  MdpSpec mdp = MdpSpec::with_dims(doc.at("num_states").get<int>(),
                                   doc.at("num_actions").get<int>(),
                                   doc.at("horizon").get<int>(),
                                   doc.value("initial_state", 0));
  mdp.cost_noise = cost_noise_from_string(doc.value("cost_noise", "bernoulli"));
  const json& trans = doc.at("transitions");
  const json& costs = doc.at("mean_costs");
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.num_states; ++s) {
      for (int a = 0; a < mdp.num_actions; ++a) {
        mdp.mean_cost(h, s, a) = costs.at(h).at(s).at(a).get<double>();
        const json& row = trans.at(h).at(s).at(a);
        if (static_cast<int>(row.size()) != mdp.num_states) {
          throw std::invalid_argument("mdp json: transition row has wrong length");
        }
        for (int s2 = 0; s2 < mdp.num_states; ++s2) {
          mdp.transition(h, s, a, s2) = row.at(s2).get<double>();
        }
      }
    }
  }
  mdp.validate();
  return mdp;
}

}  // namespace

MdpSpec mdp_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("mdp json: parse error: ") + e.what());
  }
  try {
    return mdp_from_json(doc);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("mdp json: bad document: ") + e.what());
  }
}

std::string mdp_to_json_text(const MdpSpec& mdp) {
  return mdp_to_json(mdp).dump(2);
}

MdpSpec load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_mdp: cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return mdp_from_json_text(buf.str());
}

void save_mdp(const MdpSpec& mdp, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_mdp: cannot open '" + path + "'");
  }
  out << mdp_to_json_text(mdp) << '\n';
}

}  // namespace dprl
