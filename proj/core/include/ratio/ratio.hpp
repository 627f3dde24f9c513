#pragma once

#include "ratio/architecture.hpp"
#include "ratio/attacks.hpp"
#include "ratio/calibration.hpp"
#include "ratio/checkpoint.hpp"
#include "ratio/classifier.hpp"
#include "ratio/counterfactual.hpp"
#include "ratio/data.hpp"
#include "ratio/error.hpp"
#include "ratio/evaluation.hpp"
#include "ratio/optimizer.hpp"
#include "ratio/probability.hpp"
#include "ratio/rng.hpp"
#include "ratio/tensor.hpp"
#include "ratio/threat_model.hpp"
#include "ratio/training.hpp"
