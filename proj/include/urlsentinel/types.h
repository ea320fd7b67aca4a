// Copyright 2026 The URLSentinel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef URLSENTINEL_TYPES_H_
#define URLSENTINEL_TYPES_H_

#include <vector>

#include <Eigen/Dense>

namespace urlsentinel {

// One sample per row.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using FeatureVector = Eigen::VectorXd;

// Binary class labels: 0 = benign, 1 = malicious.
using Labels = std::vector<int>;

}  // namespace urlsentinel

#endif  // URLSENTINEL_TYPES_H_
