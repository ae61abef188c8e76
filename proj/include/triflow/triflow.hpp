#pragma once

#include "triflow/error.hpp"
#include "triflow/date.hpp"
#include "triflow/types.hpp"
#include "triflow/csv.hpp"
#include "triflow/sandbox.hpp"
#include "triflow/generator.hpp"
#include "triflow/agent.hpp"
#include "triflow/remote_agent.hpp"
#include "triflow/request.hpp"
#include "triflow/retrieval.hpp"
#include "triflow/itinerary.hpp"
#include "triflow/constraints.hpp"
#include "triflow/arbitration.hpp"
#include "triflow/slots.hpp"
#include "triflow/planner.hpp"
#include "triflow/governance.hpp"
#include "triflow/orchestrator.hpp"
#include "triflow/metrics.hpp"
#include "triflow/benchmark.hpp"
