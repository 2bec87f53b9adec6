#pragma once

#include "admm.hpp"
#include "certificate.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "graph.hpp"
#include "metrics.hpp"
#include "prox.hpp"
#include "random.hpp"
