// tisdrm/tisdrm.h

// Copyright 2026  The tisdrm Authors
//
// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TISDRM_TISDRM_H_
#define TISDRM_TISDRM_H_

#include "tisdrm/common.h"
#include "tisdrm/core.h"
#include "tisdrm/dynamic_model.h"
#include "tisdrm/eval.h"
#include "tisdrm/fusion.h"
#include "tisdrm/lattice.h"
#include "tisdrm/model.h"
#include "tisdrm/rescorer.h"
#include "tisdrm/static_prior.h"

#endif  // TISDRM_TISDRM_H_
