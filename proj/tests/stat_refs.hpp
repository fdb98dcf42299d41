// Copyright 2026 The wmark Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

namespace wmark::testing {

struct TailRef {
  double t, df, p;
};

// Two-sided Student-t tail probabilities at 50 significant digits (mpmath).
inline constexpr TailRef kTail[] = {
    {0.0, 1, 1.0},
    {0.5, 1, 0.70483276469913345},
    {1.0954451150103321, 1, 0.47102273016414378},
    {5.0, 1, 0.12566591637800237},
    {1000.0, 1, 0.00063661956016111788},
    {100000.0, 1, 6.3661977234636068e-6},
    {0.5, 2.5, 0.65769791986971469},
    {2.0, 2.5, 0.15739149575796599},
    {40.0, 2.5, 0.00014195634290493383},
    {1000.0, 2.5, 4.5494927896614904e-8},
    {100000.0, 2.5, 4.5495038463512442e-13},
    {0.5, 6, 0.63488},
    {1.0954451150103321, 6, 0.31533359620122976},
    {2.0, 6, 0.092426311531675132},
    {5.0, 6, 0.0024523417607585509},
    {10.0, 6, 5.7919827549536253e-5},
    {40.0, 6, 1.6318360930542469e-8},
    {1000.0, 6, 6.7498936886481645e-17},
    {100000.0, 6, 6.74999998936875e-29},
    {0.5, 30, 0.62072300488512729},
    {2.0, 30, 0.054625044962983104},
    {5.0, 30, 2.3296685467007795e-5},
    {10.0, 30, 4.5752514082296132e-11},
    {40.0, 30, 1.3726045194406403e-27},
    {1000.0, 30, 2.0720034831117331e-69},
    {100000.0, 30, 2.072906840146629e-129},
    {0.5, 200, 0.61762475231646067},
    {2.0, 200, 0.046853186187070977},
    {5.0, 200, 1.2501981277715395e-6},
    {10.0, 200, 2.3774831444207591e-19},
    {40.0, 200, 2.2487396535202507e-97},
    {0.5, 10000, 0.61708607932323341},
    {2.0, 10000, 0.045527260661435443},
    {5.0, 10000, 5.8303266136626473e-7},
    {10.0, 10000, 1.9632807428663829e-23},
};

}  // namespace wmark::testing
