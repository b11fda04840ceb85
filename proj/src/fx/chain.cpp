#include "fxlearn/fx/chain.hpp"

#include <numeric>
#include <stdexcept>

namespace fxlearn {

namespace {

ParamSpecSet concat_specs(const std::vector<std::unique_ptr<BlackboxFx>>& members) {
  if (members.empty()) throw std::invalid_argument("chain needs at least one member");
  std::vector<ParamSpec> all;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (const auto& s : members[i]->param_specs().specs()) {
      ParamSpec p = s;
      p.name = "fx" + std::to_string(i + 1) + "." + s.name;
      all.push_back(std::move(p));
    }
  }
  return ParamSpecSet(std::move(all));
}

int lcm_block(const std::vector<std::unique_ptr<BlackboxFx>>& members) {
  int l = 1;
  for (const auto& m : members) l = std::lcm(l, m->block_size());
  return l;
}

}  // namespace

ChainFx::ChainFx(std::vector<std::unique_ptr<BlackboxFx>> members)
    : BlackboxFx(concat_specs(members), lcm_block(members)), members_(std::move(members)) {}

void ChainFx::reset() {
  for (auto& m : members_) m->reset();
}

std::unique_ptr<BlackboxFx> ChainFx::clone_config() const {
  std::vector<std::unique_ptr<BlackboxFx>> clones;
  clones.reserve(members_.size());
  for (const auto& m : members_) clones.push_back(m->clone_config());
  return std::make_unique<ChainFx>(std::move(clones));
}

int ChainFx::latency() const {
  int total = 0;
  for (const auto& m : members_) total += m->latency();
  return total;
}

void ChainFx::do_process(const AudioFrame& x, const ParamVector& theta, AudioFrame& out) {
  AudioFrame stage = x;
  std::size_t offset = 0;
  for (auto& m : members_) {
    auto p = static_cast<std::size_t>(m->param_count());
    ParamVector slice(theta.begin() + static_cast<long>(offset),
                      theta.begin() + static_cast<long>(offset + p));
    stage = m->process(stage, slice);
    offset += p;
  }
  out = std::move(stage);
}

void ChainFx::run_block(std::span<const double>, std::span<double>, std::span<const double>) {
  throw std::logic_error("ChainFx processes whole frames");
}

}  // namespace fxlearn
