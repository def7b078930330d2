#pragma once

#include "nvmag/constants.hpp"
#include "nvmag/dsp.hpp"
#include "nvmag/io.hpp"
#include "nvmag/noise_chain.hpp"
#include "nvmag/phantom.hpp"
#include "nvmag/quadrature.hpp"
#include "nvmag/ramsey_fit.hpp"
#include "nvmag/sequence.hpp"
#include "nvmag/spin_model.hpp"
#include "nvmag/time_series.hpp"
