# Independent re-verification of construction results
