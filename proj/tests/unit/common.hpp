#pragma once

#include <string>

#include "wmmr/litmus.hpp"

inline std::string corpus_path(const std::string& name) { return std::string(WMMR_SOURCE_DIR) + "/corpus/" + name + ".lit"; }

inline wmmr::LitmusTest corpus_test(const std::string& name, int unroll = 2) {
  return wmmr::elaborate(wmmr::load_litmus_file(corpus_path(name)), unroll);
}
