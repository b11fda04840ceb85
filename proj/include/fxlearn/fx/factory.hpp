#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fxlearn/blackbox_fx.hpp"

namespace fxlearn {

// String identifiers usable from config files.
std::vector<std::string> registered_fx_ids();

// Creates a fresh effect by id. Throws std::invalid_argument for unknown ids
// and for "chain" (chains are assembled from member ids via make_chain).
std::unique_ptr<BlackboxFx> make_fx(const std::string& id, double sample_rate = 22050.0);

std::unique_ptr<BlackboxFx> make_chain(const std::vector<std::string>& member_ids,
                                       double sample_rate = 22050.0);

}  // namespace fxlearn
