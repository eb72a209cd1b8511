"""Boolean operations on oriented triangle meshes via generalized winding numbers."""
