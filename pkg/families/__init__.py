# Function families, gap functions and admissibility solvers