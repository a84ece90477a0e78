#pragma once

#include "ami/linalg/matrix.hpp"

namespace ami {

// Column-wise softmax with max subtraction.
Matrix softmax_cols(const Matrix& m);
void softmax_cols_inplace(View m);

}  // namespace ami
