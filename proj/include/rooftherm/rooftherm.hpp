// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <rooftherm/elc.hpp>
#include <rooftherm/error.hpp>
#include <rooftherm/instrument.hpp>
#include <rooftherm/pipeline.hpp>
#include <rooftherm/radiometry.hpp>
#include <rooftherm/raster.hpp>
#include <rooftherm/regression.hpp>
#include <rooftherm/spectra.hpp>
#include <rooftherm/synth.hpp>
