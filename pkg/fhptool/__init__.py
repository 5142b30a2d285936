__author__ = 'fhptool developers'
