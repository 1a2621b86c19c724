/******************************************************************************
 *
 * Copyright (c) 2026, the streampod project developers.
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 *****************************************************************************/

#ifndef STREAMPOD_STREAMPOD_HPP
#define STREAMPOD_STREAMPOD_HPP

#include "streampod/data_io.hpp"
#include "streampod/incremental_svd.hpp"
#include "streampod/mass_matrix.hpp"
#include "streampod/oracle.hpp"
#include "streampod/pod.hpp"
#include "streampod/time_grid.hpp"
#include "streampod/weighted.hpp"

#endif  // STREAMPOD_STREAMPOD_HPP
