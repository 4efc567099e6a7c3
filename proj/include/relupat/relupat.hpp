#pragma once

#include "relupat/affine.hpp"
#include "relupat/data.hpp"
#include "relupat/decompose.hpp"
#include "relupat/distill.hpp"
#include "relupat/explain.hpp"
#include "relupat/lp.hpp"
#include "relupat/mine.hpp"
#include "relupat/model.hpp"
#include "relupat/oracle.hpp"
#include "relupat/pattern.hpp"
#include "relupat/postcondition.hpp"
#include "relupat/relax.hpp"
#include "relupat/types.hpp"
#include "relupat/verify.hpp"
