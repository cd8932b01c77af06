#pragma once

// Conditional generative modeling on level-sets of collective variables:
// CV-conditioned flow matching, ABF-enriched training data, gradient-flow
// projection and the evaluation harness for the 2D synthetic and
// Mueller-Brown experiments.

#include "levelflow/abf.hpp"
#include "levelflow/adam.hpp"
#include "levelflow/autoencoder.hpp"
#include "levelflow/checkpoint.hpp"
#include "levelflow/config.hpp"
#include "levelflow/constrained.hpp"
#include "levelflow/csv_io.hpp"
#include "levelflow/cv_map.hpp"
#include "levelflow/dataset.hpp"
#include "levelflow/errors.hpp"
#include "levelflow/evaluation.hpp"
#include "levelflow/flow_model.hpp"
#include "levelflow/langevin.hpp"
#include "levelflow/linalg.hpp"
#include "levelflow/mean_force.hpp"
#include "levelflow/mlp.hpp"
#include "levelflow/pipeline.hpp"
#include "levelflow/potentials.hpp"
#include "levelflow/projection.hpp"
#include "levelflow/rng.hpp"
