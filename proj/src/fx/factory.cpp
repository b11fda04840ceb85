#include "fxlearn/fx/factory.hpp"

#include <stdexcept>

#include "fxlearn/fx/basic.hpp"
#include "fxlearn/fx/chain.hpp"
#include "fxlearn/fx/graphic_eq.hpp"
#include "fxlearn/fx/limiter.hpp"
#include "fxlearn/fx/multiband.hpp"

namespace fxlearn {

std::vector<std::string> registered_fx_ids() {
  return {"multiband_compressor", "multiband_compressor16", "multiband_gate", "graphic_eq",
          "limiter",              "gain",                   "identity",       "softclip",
          "smoother",             "chain"};
}

std::unique_ptr<BlackboxFx> make_fx(const std::string& id, double sample_rate) {
  if (id == "multiband_compressor") return std::make_unique<MultibandCompressorFx>(sample_rate);
  if (id == "multiband_compressor16") {
    // Mastering variant: no knees, no output gain.
    return std::make_unique<MultibandCompressorFx>(sample_rate, false, false);
  }
  if (id == "multiband_gate") return std::make_unique<MultibandGateFx>(sample_rate);
  if (id == "graphic_eq") return std::make_unique<GraphicEqFx>(sample_rate);
  if (id == "limiter") return std::make_unique<LimiterFx>(sample_rate);
  if (id == "gain") return std::make_unique<GainFx>();
  if (id == "identity") return std::make_unique<IdentityFx>();
  if (id == "softclip") return std::make_unique<SoftClipFx>();
  if (id == "smoother") return std::make_unique<SmootherFx>();
  if (id == "chain") {
    throw std::invalid_argument("'chain' needs member ids; use make_chain / fx.chain config key");
  }
  throw std::invalid_argument("unknown effect id '" + id + "'");
}

std::unique_ptr<BlackboxFx> make_chain(const std::vector<std::string>& member_ids,
                                       double sample_rate) {
  std::vector<std::unique_ptr<BlackboxFx>> members;
  members.reserve(member_ids.size());
  for (const auto& id : member_ids) members.push_back(make_fx(id, sample_rate));
  return std::make_unique<ChainFx>(std::move(members));
}

}  // namespace fxlearn
