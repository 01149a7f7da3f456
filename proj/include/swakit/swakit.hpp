#pragma once

#include "swakit/checkpoint.hpp"
#include "swakit/config.hpp"
#include "swakit/dataset.hpp"
#include "swakit/errors.hpp"
#include "swakit/experiment.hpp"
#include "swakit/flatness.hpp"
#include "swakit/matrix.hpp"
#include "swakit/model.hpp"
#include "swakit/optimizer.hpp"
#include "swakit/param_vector.hpp"
#include "swakit/rng.hpp"
#include "swakit/schedule.hpp"
#include "swakit/swa.hpp"
#include "swakit/trainer.hpp"
#include "swakit/version.hpp"
