// SPDX-License-Identifier: Apache-2.0
#include "cirnn/dataset.hpp"

#include <algorithm>

namespace cirnn {

Matrix model_inputs(const Window& w, bool append_context) {
  if (!append_context) return w.xs;
  Matrix out(w.xs.rows(), w.xs.cols() + w.zs.cols());
  for (std::size_t t = 0; t < w.xs.rows(); ++t) {
    auto row = out.row(t);
    std::copy(w.xs.row(t).begin(), w.xs.row(t).end(), row.begin());
    std::copy(w.zs.row(t).begin(), w.zs.row(t).end(), row.begin() + static_cast<long>(w.xs.cols()));
  }
  return out;
}

}  // namespace cirnn
