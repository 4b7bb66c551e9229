#pragma once

#include <string>
#include <vector>

#include "irsnoma/clustering.hpp"
#include "irsnoma/mobility.hpp"
#include "irsnoma/noma.hpp"
#include "irsnoma/rl.hpp"

namespace irsnoma::csv {

// user_id,slot,x_m,y_m
std::string format_trajectories(const std::vector<mobility::Trajectory>& trajectories);
// Inverse of format_trajectories. Users come back sorted by id; slots must be
// contiguous from 0. Throws InvalidArgument on malformed input.
std::vector<mobility::Trajectory> parse_trajectories(const std::string& text);

// slot,user_id,cluster_id,resp_max; one assignment per slot.
std::string format_clusters(const std::vector<clustering::ClusterAssignment>& slots);

// slot,cluster,user,tau_own,rate_own,sic_ok; one report per slot.
std::string format_rate_reports(const std::vector<noma::RateReport>& slots);

// episode,step,slot,epsilon,action_id,reward,loss,sum_rate
std::string format_training_trace(const std::vector<rl::StepRecord>& trace);

// Throws Error when the file cannot be written.
void write_file(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

}  // namespace irsnoma::csv
