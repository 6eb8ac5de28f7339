#pragma once

#include "msdd/bio.hpp"
#include "msdd/common.hpp"
#include "msdd/config.hpp"
#include "msdd/fields.hpp"
#include "msdd/geometry.hpp"
#include "msdd/merge.hpp"
#include "msdd/oracle.hpp"
#include "msdd/output.hpp"
#include "msdd/pipeline.hpp"
#include "msdd/rtr.hpp"
#include "msdd/solve.hpp"
#include "msdd/specfun.hpp"
