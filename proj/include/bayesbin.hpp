#pragma once

#include "bayesbin/error.hpp"
#include "bayesbin/random.hpp"
#include "bayesbin/dataset.hpp"
#include "bayesbin/encoding.hpp"
#include "bayesbin/links.hpp"
#include "bayesbin/model.hpp"
#include "bayesbin/sampler.hpp"
#include "bayesbin/diagnostics.hpp"
#include "bayesbin/loo.hpp"
#include "bayesbin/prediction.hpp"
#include "bayesbin/oracle.hpp"
#include "bayesbin/synthetic.hpp"
#include "bayesbin/chain_file.hpp"
#include "bayesbin/config.hpp"
#include "bayesbin/commands.hpp"
#include "bayesbin/verify.hpp"
