#include "irsnoma/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "irsnoma/error.hpp"

namespace irsnoma::csv {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_field(const std::string& s, std::size_t line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw InvalidArgument("line " + std::to_string(line) + ": bad field '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_trajectories(const std::vector<mobility::Trajectory>& trajectories) {
  std::string out = "user_id,slot,x_m,y_m\n";
  for (const auto& t : trajectories) {
    for (std::size_t s = 0; s < t.positions.size(); ++s) {
      out += std::to_string(t.user_id) + ',' + std::to_string(s) + ',' + num(t.positions[s].x) + ',' +
             num(t.positions[s].y) + '\n';
    }
  }
  return out;
}

std::vector<mobility::Trajectory> parse_trajectories(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "user_id,slot,x_m,y_m") throw InvalidArgument("trajectory CSV: bad header");
  std::map<std::size_t, std::map<std::size_t, channel::Position>> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 4) throw InvalidArgument("line " + std::to_string(n) + ": expected 4 fields");
    const auto user = parse_field<std::size_t>(f[0], n);
    const auto slot = parse_field<std::size_t>(f[1], n);
    if (!rows[user].emplace(slot, channel::Position{parse_field<double>(f[2], n), parse_field<double>(f[3], n)}).second) {
      throw InvalidArgument("line " + std::to_string(n) + ": duplicate (user, slot)");
    }
  }
  std::vector<mobility::Trajectory> out;
  for (auto& [user, slots] : rows) {
    mobility::Trajectory t{user, {}};
    for (auto& [slot, p] : slots) {
      if (slot != t.positions.size()) throw InvalidArgument("trajectory CSV: slots of user " + std::to_string(user) + " are not contiguous");
      t.positions.push_back(p);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::string format_clusters(const std::vector<clustering::ClusterAssignment>& slots) {
  std::string out = "slot,user_id,cluster_id,resp_max\n";
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const auto& a = slots[s];
    for (std::size_t u = 0; u < a.assignment.size(); ++u) {
      out += std::to_string(s) + ',' + std::to_string(u) + ',' + std::to_string(a.assignment[u]) + ',' +
             short_num(u < a.resp_max.size() ? a.resp_max[u] : 1.0) + '\n';
    }
  }
  return out;
}

std::string format_rate_reports(const std::vector<noma::RateReport>& slots) {
  std::string out = "slot,cluster,user,tau_own,rate_own,sic_ok\n";
  for (std::size_t s = 0; s < slots.size(); ++s) {
    for (const auto& u : slots[s].users) {
      out += std::to_string(s) + ',' + std::to_string(u.cluster) + ',' + std::to_string(u.user) + ',' +
             short_num(u.tau_own) + ',' + short_num(u.rate_own) + ',' + (u.sic_ok ? "1" : "0") + '\n';
    }
  }
  return out;
}

std::string format_training_trace(const std::vector<rl::StepRecord>& trace) {
  std::string out = "episode,step,slot,epsilon,action_id,reward,loss,sum_rate\n";
  for (const auto& r : trace) {
    out += std::to_string(r.episode) + ',' + std::to_string(r.step) + ',' + std::to_string(r.slot) + ',' +
           short_num(r.epsilon) + ',' + std::to_string(r.action) + ',' + short_num(r.reward) + ',' +
           short_num(r.loss) + ',' + short_num(r.sum_rate) + '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace irsnoma::csv
