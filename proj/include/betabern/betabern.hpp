#pragma once

#include "betabern/numeric.hpp"
#include "betabern/term.hpp"
#include "betabern/syntax.hpp"
#include "betabern/poly.hpp"
#include "betabern/bernstein.hpp"
#include "betabern/chain.hpp"
#include "betabern/normalizer.hpp"
#include "betabern/semantics.hpp"
#include "betabern/funcarg.hpp"
#include "betabern/decide.hpp"
#include "betabern/axioms.hpp"
#include "betabern/simulate.hpp"
