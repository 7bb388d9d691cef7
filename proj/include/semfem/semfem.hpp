#pragma once

#include "semfem/adaptive.hpp"
#include "semfem/assembly.hpp"
#include "semfem/config.hpp"
#include "semfem/energy.hpp"
#include "semfem/errors.hpp"
#include "semfem/femspace.hpp"
#include "semfem/geometry.hpp"
#include "semfem/iterate.hpp"
#include "semfem/local_refine.hpp"
#include "semfem/marking.hpp"
#include "semfem/mesh.hpp"
#include "semfem/patch.hpp"
#include "semfem/problem.hpp"
#include "semfem/quadrature.hpp"
#include "semfem/runner.hpp"
#include "semfem/sparse.hpp"
#include "semfem/special.hpp"
#include "semfem/vtk.hpp"
