#pragma once

#include "satiqc/config.hpp"

#include <string>

namespace fixtures {

inline std::string config_path(const std::string& name) { return std::string(SATIQC_CONFIG_DIR) + "/" + name; }

inline satiqc::ProblemConfig second_order() { return satiqc::load_config(config_path("second_order.json")); }
inline satiqc::ProblemConfig cart() { return satiqc::load_config(config_path("cart_pendulum.json")); }

inline satiqc::Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  satiqc::Mat m(static_cast<int>(rows.size()), static_cast<int>(rows.begin()->size()));
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline double max_abs_diff(const satiqc::Mat& a, const satiqc::Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace fixtures
