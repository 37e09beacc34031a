#pragma once

#include "holling/analysis.hpp"
#include "holling/error.hpp"
#include "holling/experiments.hpp"
#include "holling/fitting.hpp"
#include "holling/integrator.hpp"
#include "holling/io.hpp"
#include "holling/model.hpp"
